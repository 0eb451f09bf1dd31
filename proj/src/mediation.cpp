#include "mll/mediation.hpp"

#include "mll/errors.hpp"

namespace mll {

NaturalEffects natural_effects(const Table& p, const Roles& roles, int x0, int x1) {
    if (roles.mediators.empty()) throw SpecificationError("natural_effects needs at least one mediator");
    std::vector<std::string> xw{roles.exposure};
    xw.insert(xw.end(), roles.mediators.begin(), roles.mediators.end());
    std::vector<std::string> xwy = xw;
    xwy.push_back(roles.response);

    Table joint = marginalize(p, xwy);
    const auto& space = joint.space;
    const auto ypos = space.position(roles.response);
    if (space.levels(ypos) != 2) throw SpecificationError("the response must be binary");
    const int kx = space.levels(space.position(roles.exposure));
    if (x0 < 0 || x1 < 0 || x0 >= kx || x1 >= kx || x0 == x1)
        throw SpecificationError("exposure levels must be distinct and in range");

    Table pxw = marginalize(joint, xw);
    Table w_x0 = condition(pxw, {{roles.exposure, x0}});
    Table w_x1 = condition(pxw, {{roles.exposure, x1}});
    const auto& wspace = w_x0.space;

    // P(Y = 1 | x, w); the slice must carry mass.
    auto response = [&](int x, std::size_t wcell) {
        Assignment a{{roles.exposure, x}};
        auto lv = wspace.decode(wcell);
        for (std::size_t i = 0; i < lv.size(); ++i) a[wspace.variable(i).name] = lv[i];
        try {
            return condition(joint, a).values[1];
        } catch (const DegenerateError&) {
            throw PositivityError("natural_effects: P(" + roles.exposure + "=" + std::to_string(x) +
                                  ", mediators) has an empty slice that the effect needs");
        }
    };

    NaturalEffects e;
    for (std::size_t w = 0; w < wspace.total_cells(); ++w) {
        const double q0 = w_x0.values[w], q1 = w_x1.values[w];
        if (q0 == 0.0 && q1 == 0.0) continue;
        const double y1 = response(x1, w);
        if (q0 > 0.0) e.nde += (y1 - response(x0, w)) * q0;
        e.nie += y1 * (q1 - q0);
    }
    e.te = e.nde + e.nie;
    return e;
}

std::vector<Transition> adjacent_transitions(int levels) {
    std::vector<Transition> t;
    for (int x = 0; x + 1 < levels; ++x) t.emplace_back(x, x + 1);
    return t;
}

MediationResult mediation_table(const FitResult& fit, const Table& counts, const ModelSpec& spec, const Roles& roles,
                                const std::vector<Transition>& transitions, int B, std::uint64_t seed,
                                unsigned threads) {
    if (!fit.converged) throw ConvergenceError("mediation_table needs a converged fit", fit.max_grad);
    if (transitions.empty()) throw SpecificationError("no exposure transitions requested");

    auto statistic = [&](const FitResult& f) {
        Eigen::VectorXd s(static_cast<Eigen::Index>(3 * transitions.size()));
        for (std::size_t i = 0; i < transitions.size(); ++i) {
            auto e = natural_effects(f.p_hat, roles, transitions[i].first, transitions[i].second);
            s(static_cast<Eigen::Index>(3 * i)) = e.nde;
            s(static_cast<Eigen::Index>(3 * i + 1)) = e.nie;
            s(static_cast<Eigen::Index>(3 * i + 2)) = e.te;
        }
        return s;
    };

    MediationResult r;
    r.transitions = transitions;
    Eigen::VectorXd point = statistic(fit);
    BootstrapResult boot = bootstrap(counts, spec, statistic, B, seed, threads);
    r.replicates = boot.replicates;
    r.warnings = boot.warnings;
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(3 * i);
        r.nde.push_back(point(j));
        r.nie.push_back(point(j + 1));
        r.te.push_back(point(j + 2));
        r.se_nde.push_back(boot.standard_errors(j));
        r.se_nie.push_back(boot.standard_errors(j + 1));
        r.se_te.push_back(boot.standard_errors(j + 2));
    }
    return r;
}

}  // namespace mll
