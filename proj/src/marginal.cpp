#include "mll/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "mll/errors.hpp"

namespace mll {

namespace {

bool is_subset(const VarSet& a, const VarSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
    return s;
}

/// Contrast weights of each effect combination over the cells of the margin.
Eigen::MatrixXd term_weights(const FactorSpace& space, const MLLTerm& term) {
    FactorSpace sub = space.subspace(term.margin);
    std::vector<int> role(term.margin.size(), -1);  // index into effect, or -1
    for (std::size_t i = 0; i < term.margin.size(); ++i) {
        auto it = std::find(term.effect.begin(), term.effect.end(), term.margin[i]);
        if (it != term.effect.end()) role[i] = static_cast<int>(it - term.effect.begin());
    }
    std::vector<Eigen::MatrixXd> contrasts;
    for (auto v : term.effect) contrasts.push_back(contrast_matrix(space.levels(v), term.coding));

    const std::size_t n = term.full_size(space);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(sub.total_cells()));
    for (std::size_t j = 0; j < n; ++j) {
        auto lv = TermIndex::combo(space, term.effect, j);
        for (std::size_t c = 0; c < sub.total_cells(); ++c) {
            double x = 1.0;
            for (std::size_t i = 0; i < term.margin.size() && x != 0.0; ++i) {
                int y = sub.level_of(c, i);
                if (role[i] < 0)
                    x *= (y == 0) ? 1.0 : 0.0;
                else
                    x *= contrasts[static_cast<std::size_t>(role[i])](lv[static_cast<std::size_t>(role[i])] - 1, y);
            }
            w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = x;
        }
    }
    return w;
}

void check_term(const FactorSpace& space, const MLLTerm& t) {
    if (t.effect.empty()) throw SpecificationError("a term needs a nonempty effect");
    if (!std::is_sorted(t.effect.begin(), t.effect.end()) || !std::is_sorted(t.margin.begin(), t.margin.end()))
        throw SpecificationError("term variable sets must be in declaration order");
    for (auto v : t.margin)
        if (v >= space.size()) throw SpecificationError("term refers to a variable outside the space");
    if (!is_subset(t.effect, t.margin)) throw SpecificationError("term effect must be contained in its margin");
    for (const auto& d : t.deleted) TermIndex::combo_offset(space, t.effect, d);
}

}  // namespace

std::vector<std::size_t> MLLTerm::retained(const FactorSpace& space) const {
    std::vector<bool> drop(full_size(space), false);
    for (const auto& d : deleted) drop[TermIndex::combo_offset(space, effect, d)] = true;
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < drop.size(); ++j)
        if (!drop[j]) out.push_back(j);
    return out;
}

MLLTerm make_term(const FactorSpace& space, const std::vector<std::string>& effect,
                  const std::vector<std::string>& margin, Coding coding) {
    MLLTerm t{space.positions(effect), space.positions(margin), coding, {}};
    check_term(space, t);
    return t;
}

std::size_t MLLSpec::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : terms) n += t.retained(space).size();
    return n;
}

std::vector<std::size_t> MLLSpec::offsets() const {
    std::vector<std::size_t> out;
    std::size_t n = 0;
    for (const auto& t : terms) {
        out.push_back(n);
        n += t.retained(space).size();
    }
    return out;
}

std::optional<std::size_t> MLLSpec::coordinate(std::size_t term, std::size_t j) const {
    auto off = offsets();
    auto kept = terms.at(term).retained(space);
    auto it = std::find(kept.begin(), kept.end(), j);
    if (it == kept.end()) return std::nullopt;
    return off[term] + static_cast<std::size_t>(it - kept.begin());
}

std::string MLLSpec::label(std::size_t coordinate) const {
    std::size_t n = 0;
    for (const auto& t : terms) {
        auto kept = t.retained(space);
        if (coordinate < n + kept.size()) {
            auto lv = TermIndex::combo(space, t.effect, kept[coordinate - n]);
            std::vector<std::string> lvs;
            for (int l : lv) lvs.push_back(std::to_string(l));
            return join(space.names(t.effect), "*") + "|" + join(space.names(t.margin), "*") + "|" + join(lvs, ";");
        }
        n += kept.size();
    }
    throw SpecificationError("coordinate out of range");
}

void validate(const MLLSpec& spec) {
    const auto& space = spec.space;
    for (const auto& t : spec.terms) check_term(space, t);

    VarSet all(space.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::map<VarSet, std::vector<const MLLTerm*>> uses;
    for (const auto& t : spec.terms) uses[t.effect].push_back(&t);
    bool any_deleted = std::any_of(spec.terms.begin(), spec.terms.end(), [](const MLLTerm& t) { return !t.deleted.empty(); });

    for (const auto& s : nonempty_subsets(all)) {
        auto it = uses.find(s);
        std::string name = join(space.names(s), "");
        if (it == uses.end()) throw SpecificationError("interaction " + name + " is not defined in any margin");
        const auto& u = it->second;
        if (u.size() == 1) continue;
        bool pattern = u.size() == 2 && any_deleted &&
                       ((u[0]->margin == all) != (u[1]->margin == all));
        if (!pattern)
            throw SpecificationError("interaction " + name +
                                     " is defined more than once outside the marginal-plus-joint pattern");
    }
    const auto n = spec.parameter_count();
    if (n != space.total_cells() - 1)
        throw SpecificationError("spec retains " + std::to_string(n) + " coordinates, expected " +
                                 std::to_string(space.total_cells() - 1));
}

Eigen::VectorXd lambda_term(const Table& p, const MLLTerm& term) {
    check_term(p.space, term);
    Table pm = marginalize(p, term.margin);
    require_positive(pm, "lambda_term");
    Eigen::VectorXd logp = as_vector(pm).array().log();
    return term_weights(p.space, term) * logp;
}

Eigen::VectorXd mll_vector(const Table& p, const MLLSpec& spec) {
    validate(spec);
    Eigen::VectorXd out(static_cast<Eigen::Index>(spec.parameter_count()));
    Eigen::Index k = 0;
    for (const auto& t : spec.terms) {
        Eigen::VectorXd full = lambda_term(p, t);
        for (auto j : t.retained(spec.space)) out(k++) = full(static_cast<Eigen::Index>(j));
    }
    return out;
}

Eigen::MatrixXd mll_jacobian(const Table& p, const MLLSpec& spec, Coding theta_coding) {
    validate(spec);
    require_positive(p, "mll_jacobian");
    const Eigen::VectorXd pv = as_vector(p);
    const Eigen::MatrixXd D = omega(pv) * build_G(p.space, theta_coding);  // dp / dtheta'
    Eigen::MatrixXd J(static_cast<Eigen::Index>(spec.parameter_count()), D.cols());
    Eigen::Index row = 0;
    for (const auto& t : spec.terms) {
        auto map = margin_cell_map(p.space, t.margin);
        Table pm = marginalize(p, t.margin);
        Eigen::MatrixXd Dm = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pm.values.size()), D.cols());
        for (std::size_t c = 0; c < map.size(); ++c) Dm.row(static_cast<Eigen::Index>(map[c])) += D.row(static_cast<Eigen::Index>(c));
        for (std::size_t m = 0; m < pm.values.size(); ++m) Dm.row(static_cast<Eigen::Index>(m)) /= pm.values[m];
        Eigen::MatrixXd W = term_weights(p.space, t);
        for (auto j : t.retained(spec.space)) J.row(row++) = W.row(static_cast<Eigen::Index>(j)) * Dm;
    }
    return J;
}

Conditioning conditioning(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    Conditioning c;
    if (s.size() == 0) return c;
    c.max_singular = s(0);
    c.min_singular = s(s.size() - 1);
    c.condition = c.min_singular > 0 ? c.max_singular / c.min_singular : std::numeric_limits<double>::infinity();
    return c;
}

void require_nonsingular(const Eigen::MatrixXd& m, double threshold, const std::string& context) {
    auto c = conditioning(m);
    if (!(c.min_singular > threshold)) {
        std::ostringstream os;
        os << context << ": matrix is numerically singular (smallest singular value " << c.min_singular
           << ", condition estimate " << c.condition << ")";
        throw ConditioningError(os.str());
    }
}

Eigen::MatrixXd prop2_jacobian_check(const Table& p, const std::vector<std::string>& effect,
                                     const std::vector<std::string>& margin, double h) {
    MLLTerm term = make_term(p.space, effect, margin, Coding::Rc);
    ThetaVector theta = theta_from_p(p, Coding::Rc);
    TermIndex idx(p.space);
    const auto& b = idx.block(term.effect);
    const auto d = static_cast<Eigen::Index>(b.size);
    Eigen::MatrixXd J(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        ThetaVector up = theta, down = theta;
        up.values(static_cast<Eigen::Index>(b.offset) + j) += h;
        down.values(static_cast<Eigen::Index>(b.offset) + j) -= h;
        J.col(j) = (lambda_term(p_from_theta(up, p.space), term) - lambda_term(p_from_theta(down, p.space), term)) /
                   (2.0 * h);
    }
    return J;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> example1_shift(const FactorSpace& space, const ThetaVector& first,
                                                           const ThetaVector& second,
                                                           const std::string& exposure,
                                                           const std::string& response) {
    if (first.coding != Coding::Rc || second.coding != Coding::Rc)
        throw SpecificationError("example1_shift expects Rc canonical parameters");
    TermIndex idx(space);
    const auto n = static_cast<Eigen::Index>(idx.parameter_count());
    if (first.values.size() != n || second.values.size() != n)
        throw SpecificationError("canonical vectors have the wrong length");
    VarSet xy = space.positions({exposure, response});
    const auto& b = idx.block(xy);
    for (Eigen::Index i = 0; i < n; ++i) {
        bool in_xy = i >= static_cast<Eigen::Index>(b.offset) && i < static_cast<Eigen::Index>(b.offset + b.size);
        if (!in_xy && first.values(i) != second.values(i))
            throw SpecificationError("canonical vectors differ outside the " + exposure + response + " interaction");
    }
    MLLTerm term{xy, xy, Coding::Rc, {}};
    Eigen::VectorXd dl = lambda_term(p_from_theta(first, space), term) - lambda_term(p_from_theta(second, space), term);
    Eigen::VectorXd dt = first.values.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size)) -
                         second.values.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size));
    return {dl, dt};
}

MLLSpec build_prop3_spec(const FactorSpace& space, const Roles& roles, std::optional<std::vector<int>> deleted_level) {
    if (roles.mediators.empty()) throw SpecificationError("at least one mediator is required");
    std::vector<std::string> names{roles.exposure, roles.response};
    names.insert(names.end(), roles.mediators.begin(), roles.mediators.end());
    VarSet all = space.positions(names);  // throws on unknown or repeated names
    if (all.size() != space.size())
        throw SpecificationError("the space must consist of exactly the exposure, mediators and response");
    const auto x = space.position(roles.exposure);
    const auto y = space.position(roles.response);
    if (space.levels(y) != 2) throw SpecificationError("the response must be binary");
    VarSet med = space.positions(roles.mediators);

    std::vector<int> wbar;
    if (deleted_level) {
        if (deleted_level->size() != med.size()) throw SpecificationError("one deleted level per mediator is required");
        wbar = *deleted_level;
    } else {
        for (auto m : med) wbar.push_back(space.levels(m) - 1);
    }

    auto sorted = [](VarSet s) {
        std::sort(s.begin(), s.end());
        return s;
    };
    VarSet xy = sorted({x, y});
    VarSet xw = med;
    xw.push_back(x);
    xw = sorted(xw);

    MLLSpec spec;
    spec.space = space;
    spec.terms.push_back({{x}, xy, Coding::Rc, {}});
    spec.terms.push_back({{y}, xy, Coding::Rc, {}});
    spec.terms.push_back({xy, xy, Coding::Rc, {}});
    for (const auto& s : nonempty_subsets(med)) spec.terms.push_back({s, xw, Coding::Rc, {}});
    for (const auto& s : nonempty_subsets(med)) {
        VarSet e = s;
        e.push_back(x);
        spec.terms.push_back({sorted(e), xw, Coding::Rc, {}});
    }
    spec.terms.push_back({xy, all, Coding::Rc, {}});
    for (const auto& s : nonempty_subsets(med)) {
        VarSet e = s;
        e.push_back(y);
        spec.terms.push_back({sorted(e), all, Coding::Rc, {}});
    }
    for (const auto& s : nonempty_subsets(med)) {
        VarSet e = s;
        e.push_back(x);
        e.push_back(y);
        MLLTerm t{sorted(e), all, Coding::Rc, {}};
        if (s == med) {
            for (int lx = 1; lx < space.levels(x); ++lx) {
                std::vector<int> lv;
                for (auto v : t.effect) {
                    if (v == x)
                        lv.push_back(lx);
                    else if (v == y)
                        lv.push_back(1);
                    else
                        lv.push_back(wbar[static_cast<std::size_t>(std::find(med.begin(), med.end(), v) - med.begin())]);
                }
                t.deleted.push_back(std::move(lv));
            }
        }
        spec.terms.push_back(std::move(t));
    }
    if (spec.parameter_count() != space.total_cells() - 1)
        throw SpecificationError("parameter count mismatch in smooth parametrization");
    validate(spec);
    return spec;
}

}  // namespace mll
