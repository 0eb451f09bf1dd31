#include "mll/tables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mll/errors.hpp"

namespace mll {

FactorSpace::FactorSpace(std::vector<Variable> variables) : vars_(std::move(variables)) {
    std::set<std::string> seen;
    for (const auto& v : vars_) {
        if (v.name.empty()) throw SpecificationError("variable names must be nonempty");
        if (v.levels < 2)
            throw SpecificationError("variable '" + v.name + "' needs at least 2 levels");
        if (!seen.insert(v.name).second)
            throw SpecificationError("duplicate variable name '" + v.name + "'");
    }
    strides_.assign(vars_.size(), 1);
    total_ = 1;
    for (std::size_t i = vars_.size(); i-- > 0;) {
        strides_[i] = total_;
        total_ *= static_cast<std::size_t>(vars_[i].levels);
    }
}

std::size_t FactorSpace::position(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name == name) return i;
    throw SpecificationError("unknown variable '" + name + "'");
}

bool FactorSpace::contains(const std::string& name) const {
    return std::any_of(vars_.begin(), vars_.end(), [&](const Variable& v) { return v.name == name; });
}

VarSet FactorSpace::positions(const std::vector<std::string>& names) const {
    VarSet out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(position(n));
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        throw SpecificationError("variable listed twice in a set");
    return out;
}

std::vector<std::string> FactorSpace::names(const VarSet& positions) const {
    std::vector<std::string> out;
    for (auto p : positions) out.push_back(vars_.at(p).name);
    return out;
}

std::size_t FactorSpace::cell_index(std::span<const int> levels) const {
    if (levels.size() != vars_.size()) throw SpecificationError("level vector has wrong length");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (levels[i] < 0 || levels[i] >= vars_[i].levels)
            throw SpecificationError("level " + std::to_string(levels[i]) + " out of range for '" +
                                     vars_[i].name + "'");
        idx += strides_[i] * static_cast<std::size_t>(levels[i]);
    }
    return idx;
}

std::vector<int> FactorSpace::decode(std::size_t cell) const {
    std::vector<int> out(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) out[i] = level_of(cell, i);
    return out;
}

FactorSpace FactorSpace::subspace(const VarSet& positions) const {
    std::vector<Variable> vs;
    for (auto p : positions) vs.push_back(vars_.at(p));
    return FactorSpace(std::move(vs));
}

bool FactorSpace::operator==(const FactorSpace& other) const {
    if (vars_.size() != other.vars_.size()) return false;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name != other.vars_[i].name || vars_[i].levels != other.vars_[i].levels)
            return false;
    return true;
}

Table::Table(FactorSpace s, std::vector<double> v, TableKind k)
    : space(std::move(s)), values(std::move(v)), kind(k) {
    if (values.size() != space.total_cells())
        throw SpecificationError("table has " + std::to_string(values.size()) + " values, space has " +
                                 std::to_string(space.total_cells()) + " cells");
    for (double x : values)
        if (!(x >= 0.0) || !std::isfinite(x))
            throw SpecificationError("table values must be finite and nonnegative");
    if (kind == TableKind::Probabilities && std::abs(total() - 1.0) > 1e-12)
        throw SpecificationError("probability table does not sum to 1");
}

double Table::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

double Table::min_value() const {
    return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

std::vector<std::size_t> margin_cell_map(const FactorSpace& space, const VarSet& keep) {
    FactorSpace sub = space.subspace(keep);
    std::vector<std::size_t> map(space.total_cells());
    for (std::size_t c = 0; c < space.total_cells(); ++c) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < keep.size(); ++j)
            m += sub.stride(j) * static_cast<std::size_t>(space.level_of(c, keep[j]));
        map[c] = m;
    }
    return map;
}

Table marginalize(const Table& t, const VarSet& keep) {
    if (keep.empty()) throw SpecificationError("marginalize needs at least one variable to keep");
    for (auto p : keep)
        if (p >= t.space.size()) throw SpecificationError("variable position out of range");
    FactorSpace sub = t.space.subspace(keep);
    std::vector<double> out(sub.total_cells(), 0.0);
    auto map = margin_cell_map(t.space, keep);
    for (std::size_t c = 0; c < t.values.size(); ++c) out[map[c]] += t.values[c];
    Table r;
    r.space = std::move(sub);
    r.values = std::move(out);
    r.kind = t.kind;
    return r;
}

Table marginalize(const Table& t, const std::vector<std::string>& keep) {
    return marginalize(t, t.space.positions(keep));
}

Table condition(const Table& t, const Assignment& given) {
    if (given.empty()) throw SpecificationError("condition needs at least one assigned variable");
    if (given.size() >= t.space.size())
        throw SpecificationError("conditioning must leave at least one variable free");
    std::vector<int> fixed(t.space.size(), -1);
    for (const auto& [name, level] : given) {
        auto pos = t.space.position(name);
        if (level < 0 || level >= t.space.levels(pos))
            throw SpecificationError("level " + std::to_string(level) + " out of range for '" + name + "'");
        fixed[pos] = level;
    }
    VarSet rest;
    for (std::size_t i = 0; i < t.space.size(); ++i)
        if (fixed[i] < 0) rest.push_back(i);
    FactorSpace sub = t.space.subspace(rest);
    std::vector<double> out(sub.total_cells(), 0.0);
    double mass = 0.0;
    for (std::size_t c = 0; c < t.values.size(); ++c) {
        bool match = true;
        for (std::size_t i = 0; i < fixed.size() && match; ++i)
            if (fixed[i] >= 0 && t.space.level_of(c, i) != fixed[i]) match = false;
        if (!match) continue;
        std::size_t m = 0;
        for (std::size_t j = 0; j < rest.size(); ++j)
            m += sub.stride(j) * static_cast<std::size_t>(t.space.level_of(c, rest[j]));
        out[m] += t.values[c];
        mass += t.values[c];
    }
    if (!(mass > 0.0)) throw DegenerateError("conditioning slice has zero mass");
    for (double& v : out) v /= mass;
    Table r;
    r.space = std::move(sub);
    r.values = std::move(out);
    r.kind = TableKind::Probabilities;
    return r;
}

Table normalize(const Table& counts) {
    double tot = counts.total();
    if (!(tot > 0.0)) throw DegenerateError("cannot normalize a table with zero total");
    Table r = counts;
    for (double& v : r.values) v /= tot;
    r.kind = TableKind::Probabilities;
    return r;
}

}  // namespace mll
