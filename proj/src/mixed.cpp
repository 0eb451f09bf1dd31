#include "mll/mixed.hpp"

#include <algorithm>
#include <cmath>

#include "mll/errors.hpp"
#include "mll/loglinear.hpp"

namespace mll {

namespace {

Eigen::VectorXd select(const Eigen::VectorXd& v, const std::vector<std::size_t>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(idx[i]));
    return out;
}

Eigen::MatrixXd select_cols(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(idx[i]));
    return out;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& eta) {
    Eigen::VectorXd e = (eta.array() - eta.maxCoeff()).exp();
    return e / e.sum();
}

}  // namespace

MixedPartition::MixedPartition(const FactorSpace& space, std::vector<VarSet> u_terms) {
    TermIndex idx(space);
    for (auto& t : u_terms) {
        std::sort(t.begin(), t.end());
        if (!idx.find(t)) throw SpecificationError("partition names an interaction set not in the space");
    }
    for (const auto& b : idx.blocks()) {
        all_terms_.push_back(b.vars);
        bool in_u = std::find(u_terms.begin(), u_terms.end(), b.vars) != u_terms.end();
        for (std::size_t j = 0; j < b.size; ++j) (in_u ? u_coords_ : v_coords_).push_back(b.offset + j);
        if (in_u) u_terms_.push_back(b.vars);
    }
}

MixedPartition MixedPartition::from_names(const FactorSpace& space,
                                          const std::vector<std::vector<std::string>>& u_terms) {
    std::vector<VarSet> sets;
    for (const auto& t : u_terms) sets.push_back(space.positions(t));
    return MixedPartition(space, std::move(sets));
}

std::vector<VarSet> MixedPartition::v_terms() const {
    std::vector<VarSet> out;
    for (const auto& t : all_terms_)
        if (std::find(u_terms_.begin(), u_terms_.end(), t) == u_terms_.end()) out.push_back(t);
    return out;
}

MixedParam split_mixed(const Table& p, const MixedPartition& partition, Coding coding) {
    auto theta = theta_from_p(p, coding);
    auto mu = mean_params(p, coding);
    MixedParam m;
    m.space = p.space;
    m.partition = partition;
    m.coding = coding;
    m.mu_V = select(mu.values, partition.v_coords());
    m.theta_U = select(theta.values, partition.u_coords());
    return m;
}

Table invert_mixed(const MixedParam& m, const InversionOptions& options, InversionReport* report) {
    const auto& vc = m.partition.v_coords();
    const auto& uc = m.partition.u_coords();
    if (static_cast<std::size_t>(m.mu_V.size()) != vc.size() || static_cast<std::size_t>(m.theta_U.size()) != uc.size())
        throw SpecificationError("mixed parameter sizes do not match the partition");
    if (!m.mu_V.allFinite() || !m.theta_U.allFinite())
        throw SpecificationError("mixed parameters must be finite");

    const Eigen::MatrixXd G = build_G(m.space, m.coding);
    const Eigen::MatrixXd Gv = select_cols(G, vc);
    Eigen::VectorXd base = Eigen::VectorXd::Zero(G.rows());
    for (std::size_t i = 0; i < uc.size(); ++i)
        base += G.col(static_cast<Eigen::Index>(uc[i])) * m.theta_U(static_cast<Eigen::Index>(i));

    // f is convex in theta_V with gradient mu_V(p) - mu_V*. Steps must give
    // Armijo decrease of f; once f is flat to rounding, a smaller residual suffices.
    auto evaluate = [&](const Eigen::VectorXd& tv, Eigen::VectorXd& p, Eigen::VectorXd& r, double& f) {
        Eigen::VectorXd eta = base + Gv * tv;
        p = softmax(eta);
        r = m.mu_V - Gv.transpose() * p;
        f = log_sum_exp(eta) - m.mu_V.dot(tv);
    };

    Eigen::VectorXd tv = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vc.size()));
    Eigen::VectorXd p, r;
    double f = 0.0;
    evaluate(tv, p, r, f);
    double res = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    int iter = 0;
    for (; res > options.tolerance; ++iter) {
        if (iter >= options.max_iterations)
            throw ConvergenceError("invert_mixed: no convergence after " + std::to_string(iter) +
                                   " iterations, residual " + std::to_string(res),
                                   res);
        Eigen::MatrixXd C = Gv.transpose() * omega(p) * Gv;
        Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (C + C.transpose()));
        if (llt.info() != Eigen::Success)
            throw ConditioningError("invert_mixed: mean-parameter Jacobian is not positive definite");
        Eigen::VectorXd step = llt.solve(r);
        // near the boundary C is close to singular; cap the step so halving can recover
        const double len = step.cwiseAbs().maxCoeff();
        if (len > 5.0) step *= 5.0 / len;

        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h <= options.max_halvings; ++h, t *= 0.5) {
            Eigen::VectorXd tv2 = tv + t * step, p2, r2;
            double f2 = 0.0;
            evaluate(tv2, p2, r2, f2);
            if (!p2.allFinite()) continue;
            double res2 = r2.cwiseAbs().maxCoeff();
            const bool armijo = f2 <= f - 1e-4 * t * r.dot(step);
            const bool flat = std::abs(f2 - f) <= 1e-14 * (1.0 + std::abs(f));
            if (armijo || (flat && r2.norm() < r.norm())) {
                tv = std::move(tv2);
                p = std::move(p2);
                r = std::move(r2);
                f = f2;
                res = res2;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw ConvergenceError("invert_mixed: step-halving failed, target may be infeasible or ill-conditioned; residual " +
                                       std::to_string(res),
                                   res);
    }
    // polish: full Newton steps while they still shrink the residual
    for (int k = 0; k < 3 && res > 0.0 && r.size(); ++k) {
        Eigen::MatrixXd C = Gv.transpose() * omega(p) * Gv;
        Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (C + C.transpose()));
        if (llt.info() != Eigen::Success) break;
        Eigen::VectorXd tv2 = tv + llt.solve(r), p2, r2;
        double f2 = 0.0;
        evaluate(tv2, p2, r2, f2);
        if (!p2.allFinite()) break;
        double res2 = r2.cwiseAbs().maxCoeff();
        if (res2 >= res) break;
        tv = std::move(tv2);
        p = std::move(p2);
        r = std::move(r2);
        res = res2;
    }
    if (report) *report = {iter, res};

    Table out;
    out.space = m.space;
    out.values.assign(p.data(), p.data() + p.size());
    out.kind = TableKind::Probabilities;
    return out;
}

Table reconstruct_from_pairwise(const Table& mXW, const Table& mXY, const Table& mWY,
                                const Eigen::VectorXd& theta_XWY) {
    const Table* margins[3] = {&mXW, &mXY, &mWY};
    std::vector<Variable> vars;
    for (const Table* t : margins) {
        if (t->space.size() != 2) throw SpecificationError("pairwise margins must have exactly two variables");
        for (const auto& v : t->space.variables()) {
            auto it = std::find_if(vars.begin(), vars.end(), [&](const Variable& u) { return u.name == v.name; });
            if (it == vars.end())
                vars.push_back(v);
            else if (it->levels != v.levels)
                throw ConsistencyError("variable '" + v.name + "' has different level counts across margins");
        }
    }
    if (vars.size() != 3) throw SpecificationError("pairwise margins must involve exactly three variables");
    FactorSpace space(vars);
    for (const Table* t : margins)
        if (std::abs(t->total() - 1.0) > 1e-10) throw ConsistencyError("pairwise margins must be probability tables");

    // Shared one-way margins must agree.
    for (const auto& v : vars) {
        std::vector<double> ref;
        for (const Table* t : margins) {
            if (!t->space.contains(v.name)) continue;
            auto one = marginalize(*t, std::vector<std::string>{v.name}).values;
            if (ref.empty()) {
                ref = one;
                continue;
            }
            for (std::size_t i = 0; i < one.size(); ++i)
                if (std::abs(one[i] - ref[i]) > 1e-10)
                    throw ConsistencyError("pairwise margins disagree on the distribution of '" + v.name + "'");
        }
    }

    VarSet all{0, 1, 2};
    MixedPartition partition(space, {all});
    TermIndex idx(space);
    Eigen::VectorXd mu(static_cast<Eigen::Index>(partition.v_coords().size()));
    Eigen::Index k = 0;
    for (const auto& b : idx.blocks()) {
        if (b.vars.size() == 3) continue;
        auto names = space.names(b.vars);
        const Table* src = nullptr;
        for (const Table* t : margins) {
            bool has = std::all_of(names.begin(), names.end(), [&](const std::string& n) { return t->space.contains(n); });
            if (has) {
                src = t;
                break;
            }
        }
        Table sub = marginalize(*src, names);
        for (std::size_t j = 0; j < b.size; ++j) mu(k++) = sub.at(TermIndex::combo(space, b.vars, j));
    }
    if (static_cast<std::size_t>(theta_XWY.size()) != partition.u_coords().size())
        throw SpecificationError("three-way interaction has wrong length");

    MixedParam m;
    m.space = space;
    m.partition = partition;
    m.coding = Coding::Rc;
    m.mu_V = mu;
    m.theta_U = theta_XWY;
    return invert_mixed(m);
}

InformationBlocks information_blocks(const Table& p, const MixedPartition& partition, Coding coding) {
    const Eigen::MatrixXd F = canonical_information(p, coding);
    const auto& vc = partition.v_coords();
    const auto& uc = partition.u_coords();
    const auto n = F.rows();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index row = 0;
    for (auto c : vc) J.row(row++) = F.row(static_cast<Eigen::Index>(c));
    for (auto c : uc) J(row++, static_cast<Eigen::Index>(c)) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible()) throw ConditioningError("information_blocks: mixed-parameter Jacobian is singular");
    Eigen::MatrixXd Jinv = lu.inverse();
    Eigen::MatrixXd info = Jinv.transpose() * F * Jinv;

    const auto nv = static_cast<Eigen::Index>(vc.size());
    const auto nu = static_cast<Eigen::Index>(uc.size());
    return {info.topLeftCorner(nv, nv), info.bottomRightCorner(nu, nu), info.topRightCorner(nv, nu)};
}

}  // namespace mll
