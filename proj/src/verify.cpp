#include "mll/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "mll/errors.hpp"
#include "mll/identities.hpp"
#include "mll/marginal.hpp"
#include "mll/mediation.hpp"
#include "mll/mixed.hpp"
#include "mll/random.hpp"

namespace mll {

namespace {

FactorSpace space_of(const std::vector<int>& levels, const std::vector<std::string>& names) {
    std::vector<Variable> v;
    for (std::size_t i = 0; i < levels.size(); ++i) v.push_back({names[i], levels[i]});
    return FactorSpace(v);
}

const std::vector<std::vector<int>>& level_sets() {
    static const std::vector<std::vector<int>> s{{2, 2}, {3, 2}, {2, 2, 2}, {3, 2, 2}, {4, 2, 2}, {3, 3, 2}, {4, 2, 2, 2}};
    return s;
}

FactorSpace generic_space(std::size_t i) {
    static const std::vector<std::string> names{"A", "B", "C", "D"};
    return space_of(level_sets()[i % level_sets().size()], names);
}

/// XWY spaces with a binary response.
FactorSpace xwy_space(std::size_t i) {
    static const std::vector<std::vector<int>> s{{2, 2, 2}, {3, 2, 2}, {4, 2, 2}, {3, 3, 2}, {2, 4, 2}, {4, 4, 2}};
    return space_of(s[i % s.size()], {"X", "W", "Y"});
}

const Roles& xwy_roles() {
    static const Roles r{"X", {"W"}, "Y"};
    return r;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double max_cell_diff(const Table& a, const Table& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
    return d;
}

Eigen::VectorXd segment(const Eigen::VectorXd& v, const TermBlock& b) {
    return v.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size));
}

struct Check {
    std::string name;
    double tolerance;
    int instances;
    std::function<double(Rng&, int)> run;  // residual of instance i
};

}  // namespace

std::vector<CheckResult> run_identity_suite(const VerifyOptions& options) {
    const int n = std::max(1, options.trials);
    const int n_fd = std::min(n, 50);
    std::vector<Check> checks;

    checks.push_back({"contrast_design_left_inverse", 0.0, static_cast<int>(level_sets().size()) * 2, [](Rng&, int i) {
                          auto space = generic_space(static_cast<std::size_t>(i / 2));
                          Coding c = i % 2 ? Coding::Ac : Coding::Rc;
                          Eigen::MatrixXd H = build_H(space, c), G = build_G(space, c);
                          return std::max(max_abs(H * G - Eigen::MatrixXd::Identity(G.cols(), G.cols())),
                                          max_abs(H * Eigen::VectorXd::Ones(H.cols())));
                      }});
    checks.push_back({"canonical_round_trip", 1e-10, n, [](Rng& rng, int i) {
                          auto space = generic_space(static_cast<std::size_t>(i));
                          Coding c = i % 2 ? Coding::Ac : Coding::Rc;
                          Table p = random_positive_table(space, rng);
                          return max_cell_diff(p_from_theta(theta_from_p(p, c), space), p);
                      }});
    checks.push_back({"mean_jacobian_equals_cov_block", 1e-6, n_fd, [](Rng& rng, int i) {
                          auto space = generic_space(static_cast<std::size_t>(i));
                          Coding c = i % 2 ? Coding::Ac : Coding::Rc;
                          Table p = random_positive_table(space, rng);
                          TermIndex idx(space);
                          const auto& b = idx.blocks()[static_cast<std::size_t>(i) % idx.blocks().size()];
                          ThetaVector th = theta_from_p(p, c);
                          const double h = 1e-5;
                          Eigen::MatrixXd fd(b.size, b.size);
                          for (std::size_t j = 0; j < b.size; ++j) {
                              ThetaVector up = th, dn = th;
                              up.values(static_cast<Eigen::Index>(b.offset + j)) += h;
                              dn.values(static_cast<Eigen::Index>(b.offset + j)) -= h;
                              fd.col(static_cast<Eigen::Index>(j)) =
                                  (segment(mean_params(p_from_theta(up, space), c).values, b) -
                                   segment(mean_params(p_from_theta(dn, space), c).values, b)) /
                                  (2 * h);
                          }
                          return max_abs(fd - cov_block(p, b.vars, c));
                      }});
    checks.push_back({"cov_block_positive_definite", 0.0, n, [](Rng& rng, int i) {
                          auto space = generic_space(static_cast<std::size_t>(i));
                          Table p = random_positive_table(space, rng, 2.0);
                          TermIndex idx(space);
                          double bad = 0.0;
                          for (const auto& b : idx.blocks()) {
                              Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_block(p, b.vars));
                              if (!(es.eigenvalues().minCoeff() > 0)) bad += 1.0;
                          }
                          return bad;
                      }});
    auto random_partition = [](const FactorSpace& space, Rng& rng) {
        TermIndex idx(space);
        std::vector<VarSet> u;
        std::bernoulli_distribution coin(0.5);
        for (const auto& b : idx.blocks())
            if (coin(rng)) u.push_back(b.vars);
        return MixedPartition(space, u);
    };
    checks.push_back({"mixed_one_to_one", 1e-10, n, [&](Rng& rng, int i) {
                          auto space = generic_space(static_cast<std::size_t>(i));
                          Table p = random_positive_table(space, rng);
                          auto part = random_partition(space, rng);
                          return max_cell_diff(invert_mixed(split_mixed(p, part)), p);
                      }});
    checks.push_back({"mixed_variation_independence", 1e-10, n, [&](Rng& rng, int i) {
                          auto space = generic_space(static_cast<std::size_t>(i % 6));
                          Table a = random_positive_table(space, rng), b = random_positive_table(space, rng);
                          auto part = random_partition(space, rng);
                          MixedParam m = split_mixed(a, part);
                          m.theta_U = split_mixed(b, part).theta_U;
                          try {
                              Table q = invert_mixed(m);
                              auto back = split_mixed(q, part);
                              return std::max(max_abs(back.mu_V - m.mu_V), max_abs(back.theta_U - m.theta_U));
                          } catch (const ConvergenceError&) {
                              return std::numeric_limits<double>::infinity();
                          }
                      }});
    checks.push_back({"mixed_information_block_diagonal", 1e-8, n_fd, [&](Rng& rng, int i) {
                          auto space = generic_space(static_cast<std::size_t>(i));
                          Table p = random_positive_table(space, rng);
                          auto part = random_partition(space, rng);
                          return max_abs(information_blocks(p, part).cross);
                      }});
    checks.push_back({"pairwise_reconstruction", 1e-9, n, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          TermIndex idx(space);
                          ThetaVector th = random_theta(space, rng, 0.7);
                          const auto& top = idx.block({0, 1, 2});
                          th.values.segment(static_cast<Eigen::Index>(top.offset), static_cast<Eigen::Index>(top.size)).setZero();
                          Table p0 = p_from_theta(th, space);
                          Table q = reconstruct_from_pairwise(marginalize(p0, std::vector<std::string>{"X", "W"}),
                                                              marginalize(p0, std::vector<std::string>{"X", "Y"}),
                                                              marginalize(p0, std::vector<std::string>{"W", "Y"}),
                                                              Eigen::VectorXd::Zero(static_cast<Eigen::Index>(top.size)));
                          return max_cell_diff(q, p0);
                      }});
    checks.push_back({"three_way_leaves_pairwise_margins", 1e-10, n, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          Table p = random_positive_table(space, rng);
                          MixedPartition part(space, {{0, 1, 2}});
                          MixedParam m = split_mixed(p, part);
                          std::normal_distribution<double> z(0.0, 1.0);
                          for (Eigen::Index j = 0; j < m.theta_U.size(); ++j) m.theta_U(j) += z(rng);
                          Table q = invert_mixed(m);
                          double d = 0.0;
                          for (auto pair : {std::vector<std::string>{"X", "W"}, std::vector<std::string>{"X", "Y"},
                                            std::vector<std::string>{"W", "Y"}})
                              d = std::max(d, max_cell_diff(marginalize(p, pair), marginalize(q, pair)));
                          return d;
                      }});
    checks.push_back({"marginal_xy_jacobian_identity", 1e-6, n_fd, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          Table p = random_positive_table(space, rng);
                          Eigen::MatrixXd J = prop2_jacobian_check(p, {"X", "Y"}, {"X", "Y"});
                          return max_abs(J - Eigen::MatrixXd::Identity(J.rows(), J.cols()));
                      }});
    checks.push_back({"xy_shift_carries_to_margin", 1e-10, n, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          TermIndex idx(space);
                          ThetaVector a = random_theta(space, rng), b = a;
                          const auto& xy = idx.block({0, 2});
                          std::normal_distribution<double> z(0.0, 1.0);
                          for (std::size_t j = 0; j < xy.size; ++j) b.values(static_cast<Eigen::Index>(xy.offset + j)) += z(rng);
                          auto [dl, dt] = example1_shift(space, a, b, "X", "Y");
                          return max_abs(dl - dt);
                      }});
    checks.push_back({"smooth_parametrization_count", 0.0, 6, [](Rng&, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          auto spec = build_prop3_spec(space, xwy_roles());
                          return std::abs(static_cast<double>(spec.parameter_count()) -
                                          static_cast<double>(space.total_cells() - 1));
                      }});
    checks.push_back({"smooth_parametrization_nonsingular", 0.0, n, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          auto spec = build_prop3_spec(space, xwy_roles());
                          Table p = random_positive_table(space, rng);
                          return conditioning(mll_jacobian(p, spec)).min_singular > 1e-8 ? 0.0 : 1.0;
                      }});
    checks.push_back({"mll_jacobian_finite_difference", 1e-6, n_fd, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          auto spec = build_prop3_spec(space, xwy_roles());
                          Table p = random_positive_table(space, rng);
                          ThetaVector th = theta_from_p(p, Coding::Rc);
                          Eigen::MatrixXd J = mll_jacobian(p, spec);
                          const double h = 1e-5;
                          double d = 0.0;
                          for (Eigen::Index j = 0; j < th.values.size(); ++j) {
                              ThetaVector up = th, dn = th;
                              up.values(j) += h;
                              dn.values(j) -= h;
                              Eigen::VectorXd col = (mll_vector(p_from_theta(up, space), spec) -
                                                     mll_vector(p_from_theta(dn, space), spec)) /
                                                    (2 * h);
                              d = std::max(d, max_abs(col - J.col(j)));
                          }
                          return d;
                      }});
    checks.push_back({"nested_margin_difference", 1e-10, n, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          Table p = random_positive_table(space, rng);
                          Eigen::VectorXd e = evans_difference(p, {"X", "Y"}, {"X", "Y"}, {"X", "W", "Y"});
                          Eigen::VectorXd direct = lambda_term(p, make_term(space, {"X", "Y"}, {"X", "W", "Y"})) -
                                                   lambda_term(p, make_term(space, {"X", "Y"}, {"X", "Y"}));
                          return max_abs(e - direct);
                      }});
    checks.push_back({"odds_ratio_matches_nested_difference", 1e-10, n, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          Table p = random_positive_table(space, rng);
                          ThetaVector th = theta_from_p(p, Coding::Rc);
                          Eigen::VectorXd e = evans_difference(p, {"X", "Y"}, {"X", "Y"}, {"X", "W", "Y"});
                          double d = 0.0;
                          for (int x = 1; x < space.levels(0); ++x)
                              d = std::max(d, std::abs(c1_from_loglinear(th, space, xwy_roles(), x, 1) - e(x - 1)));
                          return d;
                      }});
    checks.push_back({"conditional_route_matches_odds_ratio", 1e-10, n, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          Table p = random_positive_table(space, rng);
                          ThetaVector th = theta_from_p(p, Coding::Rc);
                          double d = 0.0;
                          for (int x = 1; x < space.levels(0); ++x)
                              d = std::max(d, std::abs(sd_delta(p, xwy_roles(), x, 1) -
                                                       c1_from_loglinear(th, space, xwy_roles(), x, 1)));
                          return d;
                      }});
    checks.push_back({"response_logit_identity", 1e-10, n, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          Table p = random_positive_table(space, rng);
                          double d = 0.0;
                          for (int x = 0; x < space.levels(0); ++x)
                              for (int w = 0; w < space.levels(1); ++w) {
                                  auto [l, r] = sd_response_identity(p, xwy_roles(), x, w);
                                  d = std::max(d, std::abs(l - r));
                              }
                          return d;
                      }});
    checks.push_back({"mediator_logit_expansion", 1e-10, n, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          Table p = random_positive_table(space, rng);
                          double d = 0.0;
                          for (int x = 0; x < space.levels(0); ++x)
                              for (int w = 1; w < space.levels(1); ++w)
                                  for (int y = 0; y < 2; ++y) {
                                      double direct = std::log(p.at(std::vector<int>{x, w, y})) -
                                                      std::log(p.at(std::vector<int>{x, 0, y}));
                                      d = std::max(d, std::abs(mediator_logit_expansion(p, xwy_roles(), x, w, y) - direct));
                                  }
                          return d;
                      }});
    checks.push_back({"logistic_mapping", 1e-10, n, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          ThetaVector th = random_theta(space, rng);
                          Table p = p_from_theta(th, space);
                          auto map = logits_from_loglinear(th, space, xwy_roles());
                          double d = 0.0;
                          for (int x = 0; x < space.levels(0); ++x)
                              for (int w = 0; w < space.levels(1); ++w) {
                                  Table y = condition(p, {{"X", x}, {"W", w}});
                                  d = std::max(d, std::abs(map.response_logit(x, w) - std::log(y.values[1] / y.values[0])));
                                  for (int yy = 0; yy < 2; ++yy) {
                                      Table wt = condition(p, {{"X", x}, {"Y", yy}});
                                      d = std::max(d, std::abs(map.mediator_logit(x, yy, w) -
                                                               std::log(wt.values[static_cast<std::size_t>(w)] / wt.values[0])));
                                  }
                              }
                          return d;
                      }});
    checks.push_back({"conditional_independence_vanishes", 1e-10, n, [](Rng& rng, int i) {
                          auto space = xwy_space(static_cast<std::size_t>(i));
                          TermIndex idx(space);
                          ThetaVector th = random_theta(space, rng);
                          for (VarSet s : {VarSet{1, 2}, VarSet{0, 1, 2}}) {
                              const auto& b = idx.block(s);
                              th.values.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size)).setZero();
                          }
                          Table p = p_from_theta(th, space);
                          double d = max_abs(evans_difference(p, {"X", "Y"}, {"X", "Y"}, {"X", "W", "Y"}));
                          for (int x = 1; x < space.levels(0); ++x) {
                              d = std::max(d, std::abs(c1_from_loglinear(th, space, xwy_roles(), x, 1)));
                              d = std::max(d, std::abs(sd_delta(p, xwy_roles(), x, 1)));
                          }
                          return d;
                      }});
    checks.push_back({"natural_effects_decomposition", 1e-12, n, [](Rng& rng, int i) {
                          auto space = space_of({4, 2, 2, 2}, {"X", "U", "V", "Y"});
                          Table p = random_positive_table(space, rng);
                          Roles roles{"X", {"U", "V"}, "Y"};
                          int x0 = i % 3, x1 = x0 + 1;
                          auto e = natural_effects(p, roles, x0, x1);
                          Table y_x = marginalize(p, std::vector<std::string>{"X", "Y"});
                          auto risk = [&](int x) { return condition(y_x, {{"X", x}}).values[1]; };
                          return std::max(std::abs(e.te - (e.nde + e.nie)), std::abs(e.te - (risk(x1) - risk(x0))));
                      }});

    std::vector<CheckResult> out;
    for (std::size_t c = 0; c < checks.size(); ++c) {
        Rng rng(options.seed * 1000003ULL + c);
        CheckResult r;
        r.name = checks[c].name;
        r.tolerance = options.tolerance.value_or(checks[c].tolerance);
        r.instances = checks[c].instances;
        for (int i = 0; i < checks[c].instances; ++i) {
            double res;
            try {
                res = checks[c].run(rng, i);
            } catch (const Error&) {
                res = std::numeric_limits<double>::infinity();
            }
            if (!(res <= r.residual)) r.residual = std::isnan(res) ? std::numeric_limits<double>::infinity() : res;
        }
        r.pass = r.residual <= r.tolerance;
        out.push_back(std::move(r));
    }
    return out;
}

std::string format_report(const std::vector<CheckResult>& results) {
    std::string s;
    int passed = 0;
    char buf[256];
    for (const auto& r : results) {
        passed += r.pass;
        std::snprintf(buf, sizeof buf, "%-4s  %-40s max_residual=%.3e  tol=%.1e  n=%d\n", r.pass ? "PASS" : "FAIL",
                      r.name.c_str(), r.residual, r.tolerance, r.instances);
        s += buf;
    }
    std::snprintf(buf, sizeof buf, "%d/%zu identities passed\n", passed, results.size());
    s += buf;
    return s;
}

}  // namespace mll
