#include "mll/coding.hpp"

#include <algorithm>

#include "mll/errors.hpp"

namespace mll {

std::string to_string(Coding c) { return c == Coding::Rc ? "Rc" : "Ac"; }

Coding coding_from_string(const std::string& s) {
    if (s == "Rc" || s == "rc" || s == "RC") return Coding::Rc;
    if (s == "Ac" || s == "ac" || s == "AC") return Coding::Ac;
    throw SpecificationError("unknown coding '" + s + "' (expected Rc or Ac)");
}

Eigen::MatrixXd contrast_matrix(int levels, Coding coding) {
    if (levels < 2) throw SpecificationError("contrast_matrix needs at least 2 levels");
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(levels - 1, levels);
    for (int j = 1; j < levels; ++j) {
        c(j - 1, coding == Coding::Rc ? 0 : j - 1) = -1.0;
        c(j - 1, j) = 1.0;
    }
    return c;
}

std::vector<VarSet> nonempty_subsets(const VarSet& vars) {
    std::vector<VarSet> out;
    const std::size_t n = vars.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        VarSet s;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) s.push_back(vars[i]);
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const VarSet& a, const VarSet& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

TermIndex::TermIndex(const FactorSpace& space) {
    VarSet all(space.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (auto& s : nonempty_subsets(all)) {
        TermBlock b;
        b.size = combo_count(space, s);
        b.offset = count_;
        b.vars = std::move(s);
        count_ += b.size;
        blocks_.push_back(std::move(b));
    }
}

std::optional<std::size_t> TermIndex::find(const VarSet& vars) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        if (blocks_[i].vars == vars) return i;
    return std::nullopt;
}

const TermBlock& TermIndex::block(const VarSet& vars) const {
    auto i = find(vars);
    if (!i) throw SpecificationError("interaction set not found in term index");
    return blocks_[*i];
}

std::size_t TermIndex::combo_count(const FactorSpace& space, const VarSet& vars) {
    std::size_t n = 1;
    for (auto v : vars) n *= static_cast<std::size_t>(space.levels(v) - 1);
    return n;
}

std::vector<int> TermIndex::combo(const FactorSpace& space, const VarSet& vars, std::size_t j) {
    std::vector<int> lv(vars.size());
    for (std::size_t i = vars.size(); i-- > 0;) {
        auto base = static_cast<std::size_t>(space.levels(vars[i]) - 1);
        lv[i] = static_cast<int>(j % base) + 1;
        j /= base;
    }
    return lv;
}

std::size_t TermIndex::combo_offset(const FactorSpace& space, const VarSet& vars,
                                    const std::vector<int>& levels) {
    if (levels.size() != vars.size()) throw SpecificationError("level combination has wrong length");
    std::size_t j = 0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        int k = space.levels(vars[i]);
        if (levels[i] < 1 || levels[i] >= k)
            throw SpecificationError("interaction level " + std::to_string(levels[i]) +
                                     " must be in 1.." + std::to_string(k - 1) + " for '" +
                                     space.variable(vars[i]).name + "'");
        j = j * static_cast<std::size_t>(k - 1) + static_cast<std::size_t>(levels[i] - 1);
    }
    return j;
}

std::vector<std::size_t> TermIndex::coordinates(const std::vector<VarSet>& terms) const {
    std::vector<std::size_t> out;
    for (const auto& b : blocks_) {
        if (std::find(terms.begin(), terms.end(), b.vars) == terms.end()) continue;
        for (std::size_t j = 0; j < b.size; ++j) out.push_back(b.offset + j);
    }
    return out;
}

Eigen::MatrixXd build_H(const FactorSpace& space, Coding coding) {
    TermIndex idx(space);
    const auto k = space.total_cells();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(idx.parameter_count()),
                                              static_cast<Eigen::Index>(k));
    std::vector<Eigen::MatrixXd> contrasts;
    for (const auto& v : space.variables()) contrasts.push_back(contrast_matrix(v.levels, coding));

    for (const auto& b : idx.blocks()) {
        for (std::size_t j = 0; j < b.size; ++j) {
            auto lv = TermIndex::combo(space, b.vars, j);
            // Kronecker product of per-variable rows evaluated cell by cell.
            std::vector<int> row_level(space.size(), 0);
            for (std::size_t i = 0; i < b.vars.size(); ++i) row_level[b.vars[i]] = lv[i];
            for (std::size_t c = 0; c < k; ++c) {
                double w = 1.0;
                for (std::size_t v = 0; v < space.size() && w != 0.0; ++v) {
                    int y = space.level_of(c, v);
                    if (row_level[v] == 0)
                        w *= (y == 0) ? 1.0 : 0.0;
                    else
                        w *= contrasts[v](row_level[v] - 1, y);
                }
                H(static_cast<Eigen::Index>(b.offset + j), static_cast<Eigen::Index>(c)) = w;
            }
        }
    }
    return H;
}

Eigen::MatrixXd build_G(const FactorSpace& space, Coding coding) {
    TermIndex idx(space);
    const auto k = space.total_cells();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                              static_cast<Eigen::Index>(idx.parameter_count()));
    for (const auto& b : idx.blocks()) {
        for (std::size_t j = 0; j < b.size; ++j) {
            auto lv = TermIndex::combo(space, b.vars, j);
            for (std::size_t c = 0; c < k; ++c) {
                bool on = true;
                for (std::size_t i = 0; i < b.vars.size() && on; ++i) {
                    int y = space.level_of(c, b.vars[i]);
                    on = coding == Coding::Rc ? (y == lv[i]) : (y >= lv[i]);
                }
                if (on) G(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b.offset + j)) = 1.0;
            }
        }
    }
    return G;
}

}  // namespace mll
