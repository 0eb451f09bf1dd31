#include "mll/fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "mll/errors.hpp"
#include "mll/loglinear.hpp"

namespace mll {

Eigen::MatrixXd ModelSpec::constraint_matrix() const {
    const auto n = static_cast<Eigen::Index>(mll.parameter_count());
    const auto rows = static_cast<Eigen::Index>(zero_constraints.size() + linear_constraints.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(rows, n);
    Eigen::Index r = 0;
    for (auto c : zero_constraints) {
        if (static_cast<Eigen::Index>(c) >= n) throw SpecificationError("zero constraint refers to a missing coordinate");
        K(r++, static_cast<Eigen::Index>(c)) = 1.0;
    }
    for (const auto& lc : linear_constraints) {
        if (lc.coefficients.empty()) throw SpecificationError("empty linear constraint");
        for (const auto& [c, a] : lc.coefficients) {
            if (static_cast<Eigen::Index>(c) >= n) throw SpecificationError("linear constraint refers to a missing coordinate");
            K(r, static_cast<Eigen::Index>(c)) += a;
        }
        ++r;
    }
    return K;
}

int count_dof(const ModelSpec& spec) {
    Eigen::MatrixXd K = spec.constraint_matrix();
    if (K.rows() == 0) return 0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    lu.setThreshold(1e-10);
    const auto rank = lu.rank();
    if (rank < K.rows())
        throw SpecificationError("constraints are linearly dependent: " + std::to_string(K.rows()) + " rows, rank " +
                                 std::to_string(rank));
    return static_cast<int>(rank);
}

double log_likelihood(const Table& counts, const Table& p) {
    double l = 0.0;
    for (std::size_t i = 0; i < counts.values.size(); ++i)
        if (counts.values[i] > 0) l += counts.values[i] * std::log(p.values[i]);
    return l;
}

double deviance(const Table& counts, const Table& p) {
    const double N = counts.total();
    double d = 0.0;
    for (std::size_t i = 0; i < counts.values.size(); ++i)
        if (counts.values[i] > 0) d += counts.values[i] * std::log(counts.values[i] / (N * p.values[i]));
    return std::max(0.0, 2.0 * d);
}

namespace {

struct State {
    Eigen::VectorXd theta;
    Table p;
    Eigen::VectorXd h;  // constraint values
    double mean_loglik = 0.0;
};

Table table_from(const FactorSpace& space, const Eigen::VectorXd& v) {
    Table t;
    t.space = space;
    t.values.assign(v.data(), v.data() + v.size());
    t.kind = TableKind::Probabilities;
    return t;
}

}  // namespace

FitResult fit_mle(const Table& counts, const ModelSpec& spec, const FitOptions& options) {
    if (!(counts.space == spec.mll.space)) throw SpecificationError("counts and model are over different spaces");
    const double N = counts.total();
    if (!(N > 0)) throw DegenerateError("fit_mle: counts have zero total");
    validate(spec.mll);
    const int dof = count_dof(spec);
    const Eigen::MatrixXd K = spec.constraint_matrix();
    const Eigen::MatrixXd G = build_G(counts.space, Coding::Rc);
    const Eigen::VectorXd n = as_vector(counts);
    const Eigen::VectorXd freq = n / N;
    const bool constrained = K.rows() > 0;

    auto evaluate = [&](const Eigen::VectorXd& theta) {
        State s;
        s.theta = theta;
        Eigen::VectorXd eta = G * theta;
        Eigen::VectorXd p = (eta.array() - log_sum_exp(eta)).exp();
        s.p = table_from(counts.space, p);
        s.mean_loglik = 0.0;
        for (Eigen::Index i = 0; i < freq.size(); ++i)
            if (freq(i) > 0) s.mean_loglik += freq(i) * std::log(p(i));
        s.h = constrained ? Eigen::VectorXd(K * mll_vector(s.p, spec.mll)) : Eigen::VectorXd();
        return s;
    };
    auto merit = [&](const State& s, double rho) {
        return s.mean_loglik - (constrained ? rho * s.h.lpNorm<1>() : 0.0);
    };

    FitResult out;
    out.dof = dof;
    State cur = evaluate(Eigen::VectorXd::Zero(G.cols()));
    double rho = 0.0;
    double max_grad = 0.0, max_h = 0.0;
    bool converged = false;
    struct Polish {
        State state;
        double grad, h;
    };
    std::optional<Polish> polish;
    int iter = 0;
    for (; iter <= options.max_iterations + 1; ++iter) {
        const Eigen::VectorXd p = as_vector(cur.p);
        const Eigen::VectorXd score = G.transpose() * (freq - p);  // per observation
        Eigen::MatrixXd F = G.transpose() * omega(p) * G;
        F = 0.5 * (F + F.transpose());
        Eigen::LLT<Eigen::MatrixXd> llt(F);
        if (llt.info() != Eigen::Success) throw ConditioningError("fit_mle: information matrix is not positive definite");

        Eigen::MatrixXd A;  // dh / dtheta'
        Eigen::VectorXd step, nu;
        if (constrained) {
            A = K * mll_jacobian(cur.p, spec.mll, Coding::Rc);
            Eigen::MatrixXd FiAt = llt.solve(A.transpose());
            Eigen::VectorXd Fis = llt.solve(score);
            Eigen::MatrixXd S = A * FiAt;
            Eigen::LLT<Eigen::MatrixXd> sl(0.5 * (S + S.transpose()));
            if (sl.info() != Eigen::Success)
                throw ConditioningError("fit_mle: constraint Jacobian is rank deficient at the current point");
            nu = sl.solve(A * Fis + cur.h);
            step = Fis - FiAt * nu;
            // Projected gradient: score minus its least-squares fit by constraint normals.
            Eigen::VectorXd nu_ls = (A * A.transpose()).ldlt().solve(A * score);
            max_grad = (score - A.transpose() * nu_ls).cwiseAbs().maxCoeff();
            max_h = cur.h.cwiseAbs().maxCoeff();
        } else {
            step = llt.solve(score);
            max_grad = score.cwiseAbs().maxCoeff();
            max_h = 0.0;
        }
        if (polish) {
            // keep the polishing step only if it did not make things worse
            if (std::max(max_grad, max_h) > std::max(polish->grad, polish->h)) {
                cur = std::move(polish->state);
                max_grad = polish->grad;
                max_h = polish->h;
                out.trace.pop_back();
            }
            converged = true;
            break;
        }
        if (max_grad < options.gradient_tolerance && max_h < options.constraint_tolerance) {
            // one full Newton step past the tolerance
            polish = Polish{cur, max_grad, max_h};
            cur = evaluate(cur.theta + step);
            if (!std::isfinite(cur.mean_loglik)) {
                cur = std::move(polish->state);
                converged = true;
                break;
            }
            out.trace.push_back(merit(cur, rho));
            continue;
        }
        if (iter == options.max_iterations) break;

        if (constrained) rho = std::max(rho, 2.0 * nu.cwiseAbs().maxCoeff() + 1e-3);
        const double m0 = merit(cur, rho);
        double t = 1.0;
        std::optional<State> next;
        for (int k = 0; k <= options.max_halvings; ++k, t *= 0.5) {
            State cand = evaluate(cur.theta + t * step);
            if (!std::isfinite(cand.mean_loglik)) continue;
            if (merit(cand, rho) >= m0 - 1e-13 * (1.0 + std::abs(m0))) {
                next = std::move(cand);
                break;
            }
        }
        if (!next) break;
        cur = std::move(*next);
        out.trace.push_back(merit(cur, rho));
    }

    out.p_hat = cur.p;
    out.iterations = iter;
    out.converged = converged;
    out.max_grad = max_grad;
    out.max_constraint = max_h;
    out.deviance = deviance(counts, cur.p);
    if (!converged) {
        std::ostringstream os;
        os << "fit_mle: no convergence after " << iter << " iterations (max projected gradient " << max_grad
           << ", max constraint " << max_h << ")";
        if (options.throw_on_failure) throw ConvergenceError(os.str(), std::max(max_grad, max_h), out.trace);
        out.warnings.push_back(os.str());
    }
    if (cur.p.min_value() < 1e-10) {
        out.warnings.push_back("fitted probabilities drift to the boundary (min cell " + std::to_string(cur.p.min_value()) +
                               ")");
        warn(out.warnings.back());
    }

    out.eta_hat = mll_vector(cur.p, spec.mll);
    // Covariance: constrained inverse Fisher information mapped to eta.
    const Eigen::VectorXd p = as_vector(cur.p);
    Eigen::MatrixXd F = N * (G.transpose() * omega(p) * G);
    F = 0.5 * (F + F.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(F);
    if (llt.info() != Eigen::Success) throw ConditioningError("fit_mle: singular information at the estimate");
    Eigen::MatrixXd Vtheta = llt.solve(Eigen::MatrixXd::Identity(F.rows(), F.cols()));
    const Eigen::MatrixXd J = mll_jacobian(cur.p, spec.mll, Coding::Rc);
    if (constrained) {
        Eigen::MatrixXd A = K * J;
        Eigen::MatrixXd VAt = Vtheta * A.transpose();
        Eigen::MatrixXd S = A * VAt;
        Eigen::LDLT<Eigen::MatrixXd> sl(0.5 * (S + S.transpose()));
        if (sl.info() != Eigen::Success) throw ConditioningError("fit_mle: singular constrained information");
        Vtheta -= VAt * sl.solve(VAt.transpose());
    }
    Eigen::MatrixXd V = J * Vtheta * J.transpose();
    V = 0.5 * (V + V.transpose());
    for (auto c : spec.zero_constraints) {
        V.row(static_cast<Eigen::Index>(c)).setZero();
        V.col(static_cast<Eigen::Index>(c)).setZero();
    }
    out.covariance = std::move(V);
    return out;
}

Eigen::VectorXd standard_errors(const FitResult& fit, const ModelSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.mll.parameter_count());
    if (fit.covariance.rows() != n) throw SpecificationError("fit and model have different parameter counts");
    if (!fit.converged) throw ConvergenceError("standard errors need a converged fit", fit.max_grad);
    Eigen::VectorXd se(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double v = fit.covariance(i, i);
        if (v < -1e-10 * (1.0 + fit.covariance.diagonal().cwiseAbs().maxCoeff()))
            throw ConditioningError("negative variance in fitted covariance");
        se(i) = std::sqrt(std::max(0.0, v));
    }
    return se;
}

Table simulate(const Table& p, std::int64_t n, std::uint64_t seed) {
    if (n <= 0) throw SpecificationError("simulate needs n > 0");
    std::mt19937_64 rng(seed);
    Table out;
    out.space = p.space;
    out.kind = TableKind::Counts;
    out.values.assign(p.values.size(), 0.0);
    const double total = p.total();
    if (!(total > 0)) throw DegenerateError("simulate: probabilities have zero total");
    std::int64_t remaining = n;
    double mass = 1.0;
    for (std::size_t i = 0; i + 1 < p.values.size() && remaining > 0; ++i) {
        double q = p.values[i] / total;
        double prob = mass > 0 ? std::clamp(q / mass, 0.0, 1.0) : 1.0;
        std::binomial_distribution<std::int64_t> draw(remaining, prob);
        std::int64_t k = draw(rng);
        out.values[i] = static_cast<double>(k);
        remaining -= k;
        mass -= q;
    }
    out.values.back() += static_cast<double>(remaining);
    return out;
}

BootstrapResult bootstrap(const Table& counts, const ModelSpec& spec, const Statistic& statistic, int B,
                          std::uint64_t seed, unsigned threads, const FitOptions& options) {
    if (B < 1) throw SpecificationError("bootstrap needs B >= 1");
    fit_mle(counts, spec, options);  // the original data must be fittable
    const Table freq = normalize(counts);
    const auto N = static_cast<std::int64_t>(std::llround(counts.total()));

    std::vector<std::optional<Eigen::VectorXd>> results(static_cast<std::size_t>(B));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int b = next++; b < B; b = next++) {
            try {
                Table sample = simulate(freq, N, seed + static_cast<std::uint64_t>(b));
                results[static_cast<std::size_t>(b)] = statistic(fit_mle(sample, spec, options));
            } catch (const Error&) {
                results[static_cast<std::size_t>(b)].reset();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(B));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    BootstrapResult out;
    std::vector<Eigen::VectorXd> ok;
    for (auto& r : results) {
        if (r)
            ok.push_back(std::move(*r));
        else
            ++out.failures;
    }
    if (out.failures * 10 > B)
        throw ReliabilityError("bootstrap: " + std::to_string(out.failures) + " of " + std::to_string(B) +
                                   " replicates failed",
                               out.failures);
    out.replicates = static_cast<int>(ok.size());
    const auto d = ok.front().size();
    out.estimates = Eigen::VectorXd::Zero(d);
    for (const auto& v : ok) out.estimates += v;
    out.estimates /= static_cast<double>(ok.size());
    out.standard_errors = Eigen::VectorXd::Zero(d);
    if (ok.size() > 1) {
        for (const auto& v : ok) out.standard_errors += (v - out.estimates).cwiseAbs2();
        out.standard_errors = (out.standard_errors / static_cast<double>(ok.size() - 1)).cwiseSqrt();
    } else {
        out.warnings.push_back("only one bootstrap replicate: standard errors reported as 0");
    }
    if (out.failures > 0)
        out.warnings.push_back(std::to_string(out.failures) + " bootstrap replicates failed and were dropped");
    return out;
}

}  // namespace mll
