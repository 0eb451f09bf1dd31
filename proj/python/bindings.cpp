#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mll/mll.hpp"

namespace py = pybind11;
using namespace mll;

namespace {

using Vars = std::vector<std::pair<std::string, int>>;

FactorSpace make_space(const Vars& vars) {
    std::vector<Variable> v;
    for (const auto& [n, k] : vars) v.push_back({n, k});
    return FactorSpace(std::move(v));
}

Table make_table(const Eigen::VectorXd& values, const Vars& vars, TableKind kind) {
    return Table(make_space(vars), std::vector<double>(values.data(), values.data() + values.size()), kind);
}

Eigen::VectorXd to_vec(const Table& t) { return as_vector(t); }

ModelSpec model_of(const std::string& spec_json) {
    auto f = parse_model_json(spec_json);
    if (!f.model) throw SpecificationError("spec has no \"terms\"");
    return *f.model;
}

Vars vars_of(const FactorSpace& s) {
    Vars out;
    for (const auto& v : s.variables()) out.emplace_back(v.name, v.levels);
    return out;
}

py::dict fit_dict(const FitResult& fit, const ModelSpec& spec) {
    py::dict d;
    d["p_hat"] = to_vec(fit.p_hat);
    d["eta_hat"] = fit.eta_hat;
    d["se"] = fit.converged ? standard_errors(fit, spec) : Eigen::VectorXd();
    d["covariance"] = fit.covariance;
    d["deviance"] = fit.deviance;
    d["dof"] = fit.dof;
    d["iterations"] = fit.iterations;
    d["converged"] = fit.converged;
    d["max_grad"] = fit.max_grad;
    d["warnings"] = fit.warnings;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < spec.mll.parameter_count(); ++i) labels.push_back(spec.mll.label(i));
    d["labels"] = labels;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Marginal log-linear models for contingency tables";

    static py::exception<SpecificationError> spec_error(m, "SpecificationError", PyExc_ValueError);
    static py::exception<NumericalError> num_error(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const SpecificationError& e) {
            py::set_error(spec_error, e.what());
        } catch (const NumericalError& e) {
            py::set_error(num_error, e.what());
        }
    });

    m.def("build_H", [](const Vars& vars, const std::string& coding) {
        return build_H(make_space(vars), coding_from_string(coding));
    }, py::arg("variables"), py::arg("coding") = "Rc");
    m.def("build_G", [](const Vars& vars, const std::string& coding) {
        return build_G(make_space(vars), coding_from_string(coding));
    }, py::arg("variables"), py::arg("coding") = "Rc");

    m.def("theta_from_p", [](const Eigen::VectorXd& p, const Vars& vars, const std::string& coding) {
        return theta_from_p(make_table(p, vars, TableKind::Probabilities), coding_from_string(coding)).values;
    }, py::arg("p"), py::arg("variables"), py::arg("coding") = "Rc");
    m.def("p_from_theta", [](const Eigen::VectorXd& theta, const Vars& vars, const std::string& coding) {
        return to_vec(p_from_theta(ThetaVector{theta, coding_from_string(coding)}, make_space(vars)));
    }, py::arg("theta"), py::arg("variables"), py::arg("coding") = "Rc");
    m.def("mean_params", [](const Eigen::VectorXd& p, const Vars& vars, const std::string& coding) {
        return mean_params(make_table(p, vars, TableKind::Probabilities), coding_from_string(coding)).values;
    }, py::arg("p"), py::arg("variables"), py::arg("coding") = "Rc");
    m.def("cov_block", [](const Eigen::VectorXd& p, const Vars& vars, const std::vector<std::string>& term,
                          const std::string& coding) {
        return cov_block(make_table(p, vars, TableKind::Probabilities), term, coding_from_string(coding));
    }, py::arg("p"), py::arg("variables"), py::arg("term"), py::arg("coding") = "Rc");
    m.def("marginalize", [](const Eigen::VectorXd& p, const Vars& vars, const std::vector<std::string>& keep) {
        return to_vec(marginalize(make_table(p, vars, TableKind::Counts), keep));
    }, py::arg("values"), py::arg("variables"), py::arg("keep"));

    m.def("mll_vector", [](const Eigen::VectorXd& p, const std::string& spec_json) {
        auto spec = model_of(spec_json);
        return mll_vector(Table(spec.mll.space, std::vector<double>(p.data(), p.data() + p.size()),
                                TableKind::Probabilities),
                          spec.mll);
    }, py::arg("p"), py::arg("spec_json"));
    m.def("count_dof", [](const std::string& spec_json) { return count_dof(model_of(spec_json)); },
          py::arg("spec_json"));

    m.def("fit", [](const Eigen::VectorXd& counts, const std::string& spec_json) {
        auto spec = model_of(spec_json);
        auto n = Table(spec.mll.space, std::vector<double>(counts.data(), counts.data() + counts.size()),
                       TableKind::Counts);
        FitResult fit;
        {
            py::gil_scoped_release release;
            fit = fit_mle(n, spec);
        }
        return fit_dict(fit, spec);
    }, py::arg("counts"), py::arg("spec_json"),
          "Constrained maximum likelihood fit; counts are in cell order (last variable fastest).");

    m.def("natural_effects", [](const Eigen::VectorXd& p, const Vars& vars, const std::string& exposure,
                                const std::vector<std::string>& mediators, const std::string& response, int x0, int x1) {
        auto e = natural_effects(make_table(p, vars, TableKind::Probabilities), Roles{exposure, mediators, response}, x0, x1);
        return py::make_tuple(e.nde, e.nie, e.te);
    }, py::arg("p"), py::arg("variables"), py::arg("exposure"), py::arg("mediators"), py::arg("response"),
          py::arg("x0"), py::arg("x1"), "Returns (nde, nie, te) on the risk-difference scale.");

    m.def("mediate", [](const Eigen::VectorXd& counts, const std::string& spec_json, int B, std::uint64_t seed,
                        unsigned threads) {
        auto f = parse_model_json(spec_json);
        if (!f.model || !f.roles) throw SpecificationError("mediate needs \"terms\" and \"roles\" in the spec");
        auto n = Table(f.space, std::vector<double>(counts.data(), counts.data() + counts.size()), TableKind::Counts);
        MediationResult r;
        {
            py::gil_scoped_release release;
            auto fit = fit_mle(n, *f.model);
            const int kx = f.space.levels(f.space.position(f.roles->exposure));
            r = mediation_table(fit, n, *f.model, *f.roles, adjacent_transitions(kx), B, seed, threads);
        }
        py::dict d;
        d["transitions"] = r.transitions;
        d["nde"] = r.nde;
        d["nie"] = r.nie;
        d["te"] = r.te;
        d["se_nde"] = r.se_nde;
        d["se_nie"] = r.se_nie;
        d["se_te"] = r.se_te;
        d["replicates"] = r.replicates;
        d["warnings"] = r.warnings;
        return d;
    }, py::arg("counts"), py::arg("spec_json"), py::arg("B") = 500, py::arg("seed") = 0, py::arg("threads") = 0);

    m.def("simulate", [](const Eigen::VectorXd& p, const Vars& vars, std::int64_t n, std::uint64_t seed) {
        return to_vec(simulate(make_table(p, vars, TableKind::Probabilities), n, seed));
    }, py::arg("p"), py::arg("variables"), py::arg("n"), py::arg("seed") = 0);

    m.def("spec_variables", [](const std::string& spec_json) { return vars_of(parse_model_json(spec_json).space); },
          py::arg("spec_json"));

    m.def("verify", [](std::uint64_t seed, int trials) {
        VerifyOptions opt;
        opt.seed = seed;
        opt.trials = trials;
        std::vector<CheckResult> r;
        {
            py::gil_scoped_release release;
            r = run_identity_suite(opt);
        }
        bool ok = std::all_of(r.begin(), r.end(), [](const CheckResult& c) { return c.pass; });
        return py::make_tuple(ok, format_report(r));
    }, py::arg("seed") = 0, py::arg("trials") = 100, "Runs the identity suite; returns (all_passed, report).");
}
