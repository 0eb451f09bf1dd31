#include "mll/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "mll/errors.hpp"

namespace mll {

using json = nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    std::string s = buf;
    if (s == "-0.0000") s.erase(0, 1);
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecificationError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> names_of(const json& j, const char* what) {
    if (!j.is_array()) throw SpecificationError(std::string(what) + " must be a list of variable names");
    std::vector<std::string> out;
    for (const auto& n : j) out.push_back(n.get<std::string>());
    return out;
}

Coding coding_of(const json& j, Coding fallback) {
    return j.contains("coding") ? coding_from_string(j.at("coding").get<std::string>()) : fallback;
}

/// Maps levels listed in the order of `names` to declaration order.
std::vector<int> levels_in_order(const FactorSpace& space, const std::vector<std::string>& names, const json& lv) {
    if (!lv.is_array() || lv.size() != names.size())
        throw SpecificationError("level combination must list one level per effect variable");
    std::vector<std::pair<std::size_t, int>> pairs;
    for (std::size_t i = 0; i < names.size(); ++i) pairs.emplace_back(space.position(names[i]), lv[i].get<int>());
    std::sort(pairs.begin(), pairs.end());
    std::vector<int> out;
    for (const auto& [_, l] : pairs) out.push_back(l);
    return out;
}

std::size_t find_term(const MLLSpec& spec, const json& ref) {
    VarSet effect = spec.space.positions(names_of(ref.at("effect"), "effect"));
    std::optional<VarSet> margin;
    if (ref.contains("margin")) margin = spec.space.positions(names_of(ref.at("margin"), "margin"));
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        if (spec.terms[i].effect != effect) continue;
        if (margin && spec.terms[i].margin != *margin) continue;
        if (hit) throw SpecificationError("term reference is ambiguous; give its margin");
        hit = i;
    }
    if (!hit) throw SpecificationError("constraint refers to a term that is not in the model");
    return *hit;
}

std::size_t coordinate_of(const MLLSpec& spec, std::size_t term, const std::vector<int>& levels) {
    auto j = TermIndex::combo_offset(spec.space, spec.terms[term].effect, levels);
    auto c = spec.coordinate(term, j);
    if (!c) throw SpecificationError("constraint refers to a deleted coordinate");
    return *c;
}

MLLSpec parse_terms(const json& doc, const FactorSpace& space, const std::optional<Roles>& roles) {
    const Coding def = coding_of(doc, Coding::Rc);
    const json& terms = doc.at("terms");
    MLLSpec spec;
    spec.space = space;
    if (terms.is_string()) {
        auto kind = terms.get<std::string>();
        if (kind == "saturated") {
            VarSet all(space.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            for (auto& s : nonempty_subsets(all)) spec.terms.push_back({s, all, def, {}});
        } else if (kind == "prop3") {
            if (!roles) throw SpecificationError("\"terms\": \"prop3\" needs \"roles\"");
            std::optional<std::vector<int>> wbar;
            if (doc.contains("deleted_level")) wbar = doc.at("deleted_level").get<std::vector<int>>();
            spec = build_prop3_spec(space, *roles, wbar);
        } else {
            throw SpecificationError("unknown terms keyword '" + kind + "'");
        }
    } else {
        for (const auto& t : terms) {
            auto margin = names_of(t.at("margin"), "margin");
            Coding c = coding_of(t, def);
            std::vector<std::vector<std::string>> effects;
            if (t.contains("effects"))
                for (const auto& e : t.at("effects")) effects.push_back(names_of(e, "effect"));
            else
                effects.push_back(names_of(t.at("effect"), "effect"));
            for (const auto& e : effects) spec.terms.push_back(make_term(space, e, margin, c));
        }
    }
    if (doc.contains("deleted")) {
        for (const auto& d : doc.at("deleted")) {
            auto i = find_term(spec, d);
            auto names = names_of(d.at("effect"), "effect");
            for (const auto& lv : d.at("levels")) spec.terms[i].deleted.push_back(levels_in_order(space, names, lv));
        }
    }
    return spec;
}

ModelSpec parse_model(const json& doc, const FactorSpace& space, const std::optional<Roles>& roles) {
    ModelSpec m;
    m.mll = parse_terms(doc, space, roles);
    validate(m.mll);
    if (doc.contains("zero_constraints")) {
        for (const auto& z : doc.at("zero_constraints")) {
            auto i = find_term(m.mll, z);
            if (z.contains("levels")) {
                auto names = names_of(z.at("effect"), "effect");
                for (const auto& lv : z.at("levels"))
                    m.zero_constraints.push_back(coordinate_of(m.mll, i, levels_in_order(space, names, lv)));
            } else {
                auto off = m.mll.offsets()[i];
                auto n = m.mll.terms[i].retained(space).size();
                for (std::size_t j = 0; j < n; ++j) m.zero_constraints.push_back(off + j);
            }
        }
    }
    if (doc.contains("linear_constraints")) {
        for (const auto& lc : doc.at("linear_constraints")) {
            if (lc.contains("constant_in")) {
                auto i = find_term(m.mll, lc);
                const auto& term = m.mll.terms[i];
                auto x = space.position(lc.at("constant_in").get<std::string>());
                auto it = std::find(term.effect.begin(), term.effect.end(), x);
                if (it == term.effect.end()) throw SpecificationError("constant_in variable is not in the effect");
                const auto xi = static_cast<std::size_t>(it - term.effect.begin());
                const auto n = term.full_size(space);
                for (std::size_t j = 0; j < n; ++j) {
                    auto lv = TermIndex::combo(space, term.effect, j);
                    if (lv[xi] + 1 >= space.levels(x)) continue;
                    auto up = lv;
                    ++up[xi];
                    LinearConstraint row;
                    row.coefficients.emplace_back(coordinate_of(m.mll, i, lv), 1.0);
                    row.coefficients.emplace_back(coordinate_of(m.mll, i, up), -1.0);
                    m.linear_constraints.push_back(std::move(row));
                }
            } else {
                LinearConstraint row;
                for (const auto& c : lc.at("coefficients")) {
                    auto i = find_term(m.mll, c);
                    auto names = names_of(c.at("effect"), "effect");
                    row.coefficients.emplace_back(coordinate_of(m.mll, i, levels_in_order(space, names, c.at("levels"))),
                                                  c.at("value").get<double>());
                }
                m.linear_constraints.push_back(std::move(row));
            }
        }
    }
    count_dof(m);
    return m;
}

}  // namespace

ModelFile parse_model_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecificationError(std::string("model spec is not valid JSON: ") + e.what());
    }
    try {
        ModelFile f;
        std::vector<Variable> vars;
        for (const auto& v : doc.at("variables")) vars.push_back({v.at("name").get<std::string>(), v.at("levels").get<int>()});
        f.space = FactorSpace(std::move(vars));
        if (doc.contains("roles")) {
            const auto& r = doc.at("roles");
            Roles roles;
            roles.exposure = r.at("exposure").get<std::string>();
            roles.response = r.at("response").get<std::string>();
            if (r.contains("mediators"))
                roles.mediators = names_of(r.at("mediators"), "mediators");
            else
                roles.mediators.push_back(r.at("mediator").get<std::string>());
            f.space.positions([&] {
                auto all = roles.mediators;
                all.push_back(roles.exposure);
                all.push_back(roles.response);
                return all;
            }());
            f.roles = std::move(roles);
        }
        if (doc.contains("terms")) f.model = parse_model(doc, f.space, f.roles);
        if (doc.contains("theta")) {
            const auto& t = doc.at("theta");
            ThetaVector th;
            std::vector<double> vals;
            if (t.is_array()) {
                vals = t.get<std::vector<double>>();
            } else {
                th.coding = coding_of(t, Coding::Rc);
                vals = t.at("values").get<std::vector<double>>();
            }
            th.values = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
            if (vals.size() != f.space.total_cells() - 1)
                throw SpecificationError("theta must have " + std::to_string(f.space.total_cells() - 1) + " values");
            f.theta = std::move(th);
        }
        if (doc.contains("probabilities")) {
            auto vals = doc.at("probabilities").get<std::vector<double>>();
            Table t(f.space, std::move(vals), TableKind::Counts);
            f.probabilities = normalize(t);
        }
        return f;
    } catch (const json::exception& e) {
        throw SpecificationError(std::string("model spec: ") + e.what());
    }
}

ModelFile load_model_file(const std::string& path) { return parse_model_json(read_file(path)); }

Table parse_counts_csv(std::istream& in, const FactorSpace* space) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        header = split(line, ',');
        break;
    }
    if (header.empty()) throw SpecificationError("counts CSV is empty");
    auto cpos = std::find(header.begin(), header.end(), "count");
    if (cpos == header.end()) throw SpecificationError("line " + std::to_string(lineno) + ": missing 'count' column");
    const auto count_col = static_cast<std::size_t>(cpos - header.begin());
    std::vector<std::string> var_names;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (i != count_col) var_names.push_back(header[i]);
    if (var_names.empty()) throw SpecificationError("line " + std::to_string(lineno) + ": no variable columns");

    struct Row {
        std::vector<int> levels;
        double count;
        std::size_t line;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto f = split(line, ',');
        auto where = "line " + std::to_string(lineno) + ": ";
        if (f.size() != header.size())
            throw SpecificationError(where + "expected " + std::to_string(header.size()) + " fields, got " +
                                     std::to_string(f.size()));
        Row r{{}, 0.0, lineno};
        for (std::size_t i = 0; i < f.size(); ++i) {
            try {
                std::size_t used = 0;
                if (i == count_col) {
                    r.count = std::stod(f[i], &used);
                    if (!(r.count >= 0.0) || !std::isfinite(r.count)) throw std::invalid_argument("negative");
                } else {
                    int v = std::stoi(f[i], &used);
                    if (v < 0) throw std::invalid_argument("negative");
                    r.levels.push_back(v);
                }
                if (used != f[i].size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw SpecificationError(where + "bad value '" + f[i] + "' in column '" + header[i] + "'");
            }
        }
        rows.push_back(std::move(r));
    }

    FactorSpace sp;
    std::vector<std::size_t> col_to_pos(var_names.size());
    if (space) {
        if (var_names.size() != space->size())
            throw SpecificationError("counts CSV has " + std::to_string(var_names.size()) + " variables, model has " +
                                     std::to_string(space->size()));
        for (std::size_t i = 0; i < var_names.size(); ++i) {
            if (!space->contains(var_names[i]))
                throw SpecificationError("counts CSV column '" + var_names[i] + "' is not a model variable");
            col_to_pos[i] = space->position(var_names[i]);
        }
        sp = *space;
    } else {
        std::vector<Variable> vars;
        for (std::size_t i = 0; i < var_names.size(); ++i) {
            int mx = 1;
            for (const auto& r : rows) mx = std::max(mx, r.levels[i]);
            vars.push_back({var_names[i], mx + 1});
            col_to_pos[i] = i;
        }
        sp = FactorSpace(std::move(vars));
    }
    std::vector<double> values(sp.total_cells(), 0.0);
    std::vector<bool> seen(sp.total_cells(), false);
    for (const auto& r : rows) {
        std::vector<int> lv(sp.size());
        for (std::size_t i = 0; i < r.levels.size(); ++i) {
            auto pos = col_to_pos[i];
            if (r.levels[i] >= sp.levels(pos))
                throw SpecificationError("line " + std::to_string(r.line) + ": level " + std::to_string(r.levels[i]) +
                                         " out of range for '" + sp.variable(pos).name + "'");
            lv[pos] = r.levels[i];
        }
        auto c = sp.cell_index(lv);
        if (seen[c]) throw SpecificationError("line " + std::to_string(r.line) + ": duplicate cell");
        seen[c] = true;
        values[c] = r.count;
    }
    return Table(std::move(sp), std::move(values), TableKind::Counts);
}

Table load_counts_csv(const std::string& path, const FactorSpace* space) {
    std::ifstream in(path);
    if (!in) throw SpecificationError("cannot open '" + path + "'");
    return parse_counts_csv(in, space);
}

void write_counts_csv(std::ostream& out, const Table& counts) {
    for (const auto& v : counts.space.variables()) out << v.name << ',';
    out << "count\n";
    for (std::size_t c = 0; c < counts.values.size(); ++c) {
        for (int l : counts.space.decode(c)) out << l << ',';
        out << full(counts.values[c]) << '\n';
    }
}

std::vector<EstimateRow> estimate_rows(const FitResult& fit, const ModelSpec& spec) {
    Eigen::VectorXd se = standard_errors(fit, spec);
    Eigen::MatrixXd K = spec.constraint_matrix();
    std::vector<EstimateRow> rows;
    for (std::size_t i = 0; i < spec.mll.parameter_count(); ++i) {
        auto parts = split(spec.mll.label(i), '|');
        EstimateRow r;
        r.coordinate = i;
        r.effect = parts[0];
        r.margin = parts[1];
        r.levels = parts[2];
        r.estimate = fit.eta_hat(static_cast<Eigen::Index>(i));
        r.se = se(static_cast<Eigen::Index>(i));
        r.constrained = std::find(spec.zero_constraints.begin(), spec.zero_constraints.end(), i) !=
                        spec.zero_constraints.end();
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_estimates_csv(std::ostream& out, const std::vector<EstimateRow>& rows) {
    out << "coordinate,effect,margin,levels,estimate,se,constrained\n";
    for (const auto& r : rows)
        out << r.coordinate << ',' << r.effect << ',' << r.margin << ',' << r.levels << ',' << full(r.estimate) << ','
            << full(r.se) << ',' << (r.constrained ? 1 : 0) << '\n';
}

std::vector<EstimateRow> read_estimates_csv(std::istream& in) {
    std::string line;
    std::vector<EstimateRow> rows;
    std::size_t lineno = 0;
    std::getline(in, line);
    ++lineno;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto f = split(trim(line), ',');
        if (f.size() != 7) throw SpecificationError("line " + std::to_string(lineno) + ": expected 7 fields");
        try {
            rows.push_back({std::stoul(f[0]), f[1], f[2], f[3], std::stod(f[4]), std::stod(f[5]), f[6] == "1"});
        } catch (const std::exception&) {
            throw SpecificationError("line " + std::to_string(lineno) + ": malformed number");
        }
    }
    return rows;
}

std::string format_estimates_text(const std::vector<EstimateRow>& rows) {
    std::ostringstream os;
    std::string current;
    for (const auto& r : rows) {
        std::string head = r.effect + " in " + r.margin;
        if (head != current) {
            if (!current.empty()) os << '\n';
            current = head;
            os << head << '\n' << std::left << std::setw(12) << "  levels" << std::right << std::setw(10) << "Est."
               << std::setw(10) << "s.e." << '\n';
        }
        os << "  " << std::left << std::setw(10) << r.levels << std::right << std::setw(10) << fixed4(r.estimate)
           << std::setw(10) << fixed4(r.se) << (r.constrained ? "  (fixed)" : "") << '\n';
    }
    return os.str();
}

void write_summary_csv(std::ostream& out, const FitResult& fit) {
    out << "deviance,dof,iterations,converged,max_grad,max_constraint\n"
        << full(fit.deviance) << ',' << fit.dof << ',' << fit.iterations << ',' << (fit.converged ? 1 : 0) << ','
        << full(fit.max_grad) << ',' << full(fit.max_constraint) << '\n';
}

std::string format_summary_text(const FitResult& fit) {
    std::ostringstream os;
    char grad[32];
    std::snprintf(grad, sizeof grad, "%.3e", fit.max_grad);
    os << std::left << std::setw(12) << "deviance" << fixed4(fit.deviance) << '\n'
       << std::setw(12) << "dof" << fit.dof << '\n'
       << std::setw(12) << "iterations" << fit.iterations << '\n'
       << std::setw(12) << "converged" << (fit.converged ? "yes" : "no") << '\n'
       << std::setw(12) << "max_grad" << grad << '\n';
    for (const auto& w : fit.warnings) os << "warning: " << w << '\n';
    return os.str();
}

void write_mediation_csv(std::ostream& out, const MediationResult& m) {
    out << "from,to,effect,estimate,se\n";
    for (std::size_t i = 0; i < m.transitions.size(); ++i) {
        auto [a, b] = m.transitions[i];
        out << a << ',' << b << ",direct," << full(m.nde[i]) << ',' << full(m.se_nde[i]) << '\n';
        out << a << ',' << b << ",indirect," << full(m.nie[i]) << ',' << full(m.se_nie[i]) << '\n';
        out << a << ',' << b << ",total," << full(m.te[i]) << ',' << full(m.se_te[i]) << '\n';
    }
}

std::string format_mediation_text(const MediationResult& m) {
    std::ostringstream os;
    os << std::left << std::setw(7) << "";
    for (auto [a, b] : m.transitions) os << std::right << std::setw(20) << (std::to_string(a) + "->" + std::to_string(b));
    os << '\n' << std::left << std::setw(7) << "";
    for (std::size_t i = 0; i < m.transitions.size(); ++i) os << std::right << std::setw(10) << "Est" << std::setw(10) << "s.e.";
    os << '\n';
    auto row = [&](const char* name, const std::vector<double>& est, const std::vector<double>& se) {
        os << std::left << std::setw(7) << name;
        for (std::size_t i = 0; i < est.size(); ++i) os << std::right << std::setw(10) << fixed4(est[i]) << std::setw(10) << fixed4(se[i]);
        os << '\n';
    };
    row("Dir.", m.nde, m.se_nde);
    row("Ind.", m.nie, m.se_nie);
    row("Total", m.te, m.se_te);
    return os.str();
}

}  // namespace mll
