// mllkit: fit marginal log-linear models to contingency tables, compute
// natural effects, simulate tables and run the identity suite.
//
// Exit codes: 0 success, 1 input error, 2 numerical failure.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mll/mll.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kInputError = 1, kNumericalError = 2 };

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw mll::SpecificationError("cannot write '" + path.string() + "'");
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw mll::SpecificationError("cannot create output directory '" + dir + "'");
}

struct Inputs {
    mll::ModelFile model;
    mll::Table counts;
};

Inputs load_inputs(const std::string& data, const std::string& spec) {
    Inputs in;
    in.model = mll::load_model_file(spec);
    if (!in.model.model) throw mll::SpecificationError("model spec has no \"terms\"");
    in.counts = mll::load_counts_csv(data, &in.model.model->mll.space);
    return in;
}

std::vector<mll::Transition> parse_transitions(const std::string& text, int levels) {
    if (text == "adjacent") return mll::adjacent_transitions(levels);
    std::vector<mll::Transition> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw mll::SpecificationError("transition '" + item + "' must look like a:b");
        try {
            out.emplace_back(std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw mll::SpecificationError("transition '" + item + "' must look like a:b");
        }
    }
    return out;
}

int run_fit(const std::string& data, const std::string& spec, const std::string& out_dir) {
    auto in = load_inputs(data, spec);
    const auto& model = *in.model.model;
    mll::FitOptions opt;
    opt.throw_on_failure = false;
    auto fit = mll::fit_mle(in.counts, model, opt);
    ensure_dir(out_dir);
    const fs::path dir(out_dir);
    {
        auto o = open_out(dir / "summary.txt");
        o << mll::format_summary_text(fit);
    }
    {
        auto o = open_out(dir / "summary.csv");
        mll::write_summary_csv(o, fit);
    }
    std::cout << mll::format_summary_text(fit);
    if (!fit.converged) return kNumericalError;
    auto rows = mll::estimate_rows(fit, model);
    {
        auto o = open_out(dir / "estimates.csv");
        mll::write_estimates_csv(o, rows);
    }
    {
        auto o = open_out(dir / "estimates.txt");
        o << mll::format_estimates_text(rows);
    }
    std::cout << '\n' << mll::format_estimates_text(rows);
    return kOk;
}

int run_mediate(const std::string& data, const std::string& spec, const std::string& transitions, int B,
                std::uint64_t seed, const std::string& out_dir) {
    auto in = load_inputs(data, spec);
    if (!in.model.roles) throw mll::SpecificationError("model spec has no \"roles\"");
    const auto& roles = *in.model.roles;
    const auto& model = *in.model.model;
    const int kx = model.mll.space.levels(model.mll.space.position(roles.exposure));
    auto trans = parse_transitions(transitions, kx);
    auto fit = mll::fit_mle(in.counts, model);
    auto med = mll::mediation_table(fit, in.counts, model, roles, trans, B, seed);
    ensure_dir(out_dir);
    {
        auto o = open_out(fs::path(out_dir) / "mediation.csv");
        mll::write_mediation_csv(o, med);
    }
    std::cout << mll::format_mediation_text(med);
    for (const auto& w : med.warnings) std::cerr << "warning: " << w << '\n';
    return kOk;
}

int run_simulate(const std::string& spec, std::int64_t n, std::uint64_t seed, const std::string& out) {
    auto model = mll::load_model_file(spec);
    mll::Table p;
    if (model.theta)
        p = mll::p_from_theta(*model.theta, model.space);
    else if (model.probabilities)
        p = *model.probabilities;
    else
        throw mll::SpecificationError("simulate needs \"theta\" or \"probabilities\" in the spec");
    auto counts = mll::simulate(p, n, seed);
    if (out.empty() || out == "-") {
        mll::write_counts_csv(std::cout, counts);
    } else {
        auto o = open_out(out);
        mll::write_counts_csv(o, counts);
    }
    return kOk;
}

int run_verify(std::uint64_t seed, int trials, std::optional<double> tol, const std::string& out) {
    mll::VerifyOptions opt;
    opt.seed = seed;
    opt.trials = trials;
    opt.tolerance = tol;
    auto results = mll::run_identity_suite(opt);
    auto report = mll::format_report(results);
    std::cout << report;
    if (!out.empty()) {
        auto o = open_out(out);
        o << report;
    }
    for (const auto& r : results)
        if (!r.pass) return kNumericalError;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Marginal log-linear models for contingency tables"};
    app.require_subcommand(1);

    std::string data, spec, out_dir = ".", transitions = "adjacent", out_file;
    int B = 500, trials = 100;
    std::uint64_t seed = 0;
    std::int64_t n = 0;
    std::optional<double> tol;

    auto* fit = app.add_subcommand("fit", "Fit a model to a counts CSV");
    fit->add_option("--data", data, "Counts CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--spec", spec, "Model spec JSON")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", out_dir, "Output directory");

    auto* med = app.add_subcommand("mediate", "Natural direct and indirect effects with bootstrap s.e.");
    med->add_option("--data", data, "Counts CSV")->required()->check(CLI::ExistingFile);
    med->add_option("--spec", spec, "Model spec JSON with roles")->required()->check(CLI::ExistingFile);
    med->add_option("--transitions", transitions, "'adjacent' or a list like 0:1,1:3");
    med->add_option("--B", B, "Bootstrap replicates")->check(CLI::PositiveNumber);
    med->add_option("--seed", seed, "Random seed");
    med->add_option("--out", out_dir, "Output directory");

    auto* sim = app.add_subcommand("simulate", "Draw a multinomial table from a spec with theta or probabilities");
    sim->add_option("--spec", spec, "Spec JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--n", n, "Sample size")->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "Random seed");
    sim->add_option("--out", out_file, "Output CSV (default stdout)");

    auto* ver = app.add_subcommand("verify", "Run the identity suite on seeded random tables");
    ver->add_option("--seed", seed, "Random seed");
    ver->add_option("--trials", trials, "Random instances per identity")->check(CLI::PositiveNumber);
    ver->add_option("--tol", tol, "Override every tolerance");
    ver->add_option("--out", out_file, "Also write the report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInputError;
    }

    try {
        if (*fit) return run_fit(data, spec, out_dir);
        if (*med) return run_mediate(data, spec, transitions, B, seed, out_dir);
        if (*sim) return run_simulate(spec, n, seed, out_file);
        if (*ver) return run_verify(seed, trials, tol, out_file);
    } catch (const mll::SpecificationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const mll::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
    return kInputError;
}
