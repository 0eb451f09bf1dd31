#include "mll/identities.hpp"

#include <algorithm>
#include <cmath>

#include "mll/coding.hpp"
#include "mll/errors.hpp"

namespace mll {

namespace {

struct Xwy {
    std::string x, w, y;
    int kx, kw, ky;
};

Xwy resolve(const FactorSpace& space, const Roles& roles) {
    if (roles.mediators.size() != 1)
        throw SpecificationError("this identity needs exactly one mediator variable");
    if (space.size() != 3) throw SpecificationError("this identity needs a three-variable XWY space");
    Xwy r{roles.exposure, roles.mediators.front(), roles.response, 0, 0, 0};
    space.positions({r.x, r.w, r.y});
    r.kx = space.levels(space.position(r.x));
    r.kw = space.levels(space.position(r.w));
    r.ky = space.levels(space.position(r.y));
    if (r.ky != 2) throw SpecificationError("the response must be binary");
    return r;
}

void check_levels(const Xwy& r, int x, int y) {
    if (x < 0 || x >= r.kx || y < 0 || y >= r.ky) throw SpecificationError("exposure/response level out of range");
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// log(1 + sum_{w>0} exp(a_w)).
double log_one_plus_sum_exp(const std::vector<double>& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size() + 1));
    v(0) = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i + 1)) = a[i];
    return log_sum_exp(v);
}

}  // namespace

double theta_at(const ThetaVector& theta, const FactorSpace& space, const Assignment& levels) {
    std::vector<std::string> names;
    for (const auto& [n, l] : levels) {
        if (l == 0) return 0.0;
        names.push_back(n);
    }
    VarSet vars = space.positions(names);
    std::vector<int> lv;
    for (auto v : vars) lv.push_back(levels.at(space.variable(v).name));
    TermIndex idx(space);
    const auto& b = idx.block(vars);
    return theta.values(static_cast<Eigen::Index>(b.offset + TermIndex::combo_offset(space, vars, lv)));
}

Eigen::VectorXd evans_difference(const Table& p, const std::vector<std::string>& effect,
                                 const std::vector<std::string>& inner, const std::vector<std::string>& outer) {
    const auto& space = p.space;
    VarSet I = space.positions(effect), N = space.positions(inner), M = space.positions(outer);
    if (I.empty()) throw SpecificationError("effect must be nonempty");
    if (!std::includes(N.begin(), N.end(), I.begin(), I.end()) || !std::includes(M.begin(), M.end(), N.begin(), N.end()) ||
        N == M)
        throw SpecificationError("evans_difference needs effect within inner, inner a proper subset of outer");

    Table pm = marginalize(p, M), pn = marginalize(p, N);
    require_positive(pm, "evans_difference");
    FactorSpace sm = pm.space, sn = pn.space;

    const auto n = TermIndex::combo_count(space, I);
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        auto lv = TermIndex::combo(space, I, j);
        double acc = 0.0;
        for (std::size_t mask = 0; mask < (std::size_t{1} << I.size()); ++mask) {
            // cell with x_J at their values, everything else in the margin at 0
            std::vector<int> cm(M.size(), 0), cn(N.size(), 0);
            std::size_t dropped = I.size();
            for (std::size_t i = 0; i < I.size(); ++i) {
                if (!(mask & (std::size_t{1} << i))) continue;
                --dropped;
                cm[static_cast<std::size_t>(std::find(M.begin(), M.end(), I[i]) - M.begin())] = lv[i];
                cn[static_cast<std::size_t>(std::find(N.begin(), N.end(), I[i]) - N.begin())] = lv[i];
            }
            double log_cond = std::log(pm.at(cm)) - std::log(pn.at(cn));  // log P(0_R | x_J, 0)
            acc += (dropped % 2 == 0 ? 1.0 : -1.0) * log_cond;
        }
        out(static_cast<Eigen::Index>(j)) = acc;
    }
    return out;
}

double c1_from_loglinear(const ThetaVector& theta, const FactorSpace& space, const Roles& roles, int x, int y) {
    if (theta.coding != Coding::Rc) throw SpecificationError("c1_from_loglinear expects Rc canonical parameters");
    auto r = resolve(space, roles);
    check_levels(r, x, y);
    // log of 1 / P(W = 0 | x', y')
    auto log_norm = [&](int xa, int ya) {
        std::vector<double> a;
        for (int w = 1; w < r.kw; ++w)
            a.push_back(theta_at(theta, space, {{r.w, w}}) + theta_at(theta, space, {{r.w, w}, {r.x, xa}}) +
                        theta_at(theta, space, {{r.w, w}, {r.y, ya}}) +
                        theta_at(theta, space, {{r.w, w}, {r.x, xa}, {r.y, ya}}));
        return log_one_plus_sum_exp(a);
    };
    return -(log_norm(0, 0) - log_norm(x, 0)) + (log_norm(0, y) - log_norm(x, y));
}

double sd_delta(const Table& p, const Roles& roles, int x, int y) {
    auto r = resolve(p.space, roles);
    check_levels(r, x, y);
    require_positive(p, "sd_delta");
    Table pxw = marginalize(p, std::vector<std::string>{r.x, r.w});

    // log P(W = 0 | x', y') from P(Y | x', w) and P(W | x').
    auto log_pbar = [&](int xa, int ya) {
        Table w_given_x = condition(pxw, {{r.x, xa}});
        Table y_given_x0 = condition(p, {{r.x, xa}, {r.w, 0}});
        std::vector<double> a;
        for (int w = 1; w < r.kw; ++w) {
            Table y_given_xw = condition(p, {{r.x, xa}, {r.w, w}});
            a.push_back(std::log(y_given_xw.values[static_cast<std::size_t>(ya)]) -
                        std::log(y_given_x0.values[static_cast<std::size_t>(ya)]) +
                        std::log(w_given_x.values[static_cast<std::size_t>(w)]) - std::log(w_given_x.values[0]));
        }
        return -log_one_plus_sum_exp(a);
    };
    return log_pbar(0, 0) + log_pbar(x, y) - log_pbar(0, y) - log_pbar(x, 0);
}

std::pair<double, double> sd_response_identity(const Table& p, const Roles& roles, int x, int w) {
    auto r = resolve(p.space, roles);
    if (x < 0 || x >= r.kx || w < 0 || w >= r.kw) throw SpecificationError("level out of range");
    require_positive(p, "sd_response_identity");
    Table w_y1 = condition(p, {{r.y, 1}, {r.x, x}});
    Table w_y0 = condition(p, {{r.y, 0}, {r.x, x}});
    double lhs = std::log(w_y1.values[static_cast<std::size_t>(w)]) - std::log(w_y0.values[static_cast<std::size_t>(w)]);
    Table y_xw = condition(p, {{r.x, x}, {r.w, w}});
    Table y_x = condition(marginalize(p, std::vector<std::string>{r.x, r.y}), {{r.x, x}});
    double rhs = (std::log(y_xw.values[1]) - std::log(y_xw.values[0])) - (std::log(y_x.values[1]) - std::log(y_x.values[0]));
    return {lhs, rhs};
}

double mediator_logit_expansion(const Table& p, const Roles& roles, int x, int w, int y) {
    auto r = resolve(p.space, roles);
    check_levels(r, x, y);
    if (w < 0 || w >= r.kw) throw SpecificationError("mediator level out of range");
    if (w == 0) return 0.0;
    ThetaVector th = theta_from_p(p, Coding::Rc);
    const auto& s = p.space;
    Table pxw = marginalize(p, std::vector<std::string>{r.x, r.w});
    ThetaVector txw = theta_from_p(pxw, Coding::Rc);
    double lw_xw = theta_at(txw, pxw.space, {{r.w, w}});
    double lxw_xw = theta_at(txw, pxw.space, {{r.x, x}, {r.w, w}});
    double base = theta_at(th, s, {{r.y, 1}}) + theta_at(th, s, {{r.x, x}, {r.y, 1}});
    double shift = theta_at(th, s, {{r.w, w}, {r.y, 1}}) + theta_at(th, s, {{r.x, x}, {r.w, w}, {r.y, 1}});
    return y * shift + softplus(base) - softplus(base + shift) + lw_xw + lxw_xw;
}

LogitMap logits_from_loglinear(const ThetaVector& theta, const FactorSpace& space, const Roles& roles) {
    if (theta.coding != Coding::Rc) throw SpecificationError("logits_from_loglinear expects Rc canonical parameters");
    auto r = resolve(space, roles);
    LogitMap m;
    m.kx = r.kx;
    m.kw = r.kw;
    m.ky = r.ky;
    m.response.assign(static_cast<std::size_t>(r.kx * r.kw), 0.0);
    m.mediator.assign(static_cast<std::size_t>(r.kx * r.ky * r.kw), 0.0);
    for (int x = 0; x < r.kx; ++x)
        for (int w = 0; w < r.kw; ++w)
            m.response[static_cast<std::size_t>(x * r.kw + w)] =
                theta_at(theta, space, {{r.y, 1}}) + theta_at(theta, space, {{r.x, x}, {r.y, 1}}) +
                theta_at(theta, space, {{r.w, w}, {r.y, 1}}) + theta_at(theta, space, {{r.x, x}, {r.w, w}, {r.y, 1}});
    for (int x = 0; x < r.kx; ++x)
        for (int y = 0; y < r.ky; ++y)
            for (int w = 1; w < r.kw; ++w)
                m.mediator[static_cast<std::size_t>((x * r.ky + y) * r.kw + w)] =
                    theta_at(theta, space, {{r.w, w}}) + theta_at(theta, space, {{r.x, x}, {r.w, w}}) +
                    theta_at(theta, space, {{r.w, w}, {r.y, y}}) + theta_at(theta, space, {{r.x, x}, {r.w, w}, {r.y, y}});
    return m;
}

}  // namespace mll
