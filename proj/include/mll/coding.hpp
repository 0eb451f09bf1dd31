#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mll/tables.hpp"

namespace mll {

/// Rc: contrasts against level 0. Ac: contrasts between adjacent levels.
enum class Coding { Rc, Ac };

std::string to_string(Coding c);
Coding coding_from_string(const std::string& s);

/// (levels-1) x levels contrast rows; every row sums to zero.
Eigen::MatrixXd contrast_matrix(int levels, Coding coding);

/// One interaction set and its slice of the parameter vector.
struct TermBlock {
    VarSet vars;
    std::size_t offset = 0;
    std::size_t size = 0;
};

/// Enumerates the nonempty interaction sets of a space (by size, then
/// lexicographically on positions) and, inside each set, the non-baseline
/// level combinations with the last variable fastest.
class TermIndex {
public:
    explicit TermIndex(const FactorSpace& space);

    const std::vector<TermBlock>& blocks() const noexcept { return blocks_; }
    std::size_t parameter_count() const noexcept { return count_; }
    const TermBlock& block(const VarSet& vars) const;
    std::optional<std::size_t> find(const VarSet& vars) const;

    /// Levels (1..k-1 per variable) of the j-th combination of a term.
    static std::vector<int> combo(const FactorSpace& space, const VarSet& vars, std::size_t j);
    /// Inverse of combo(); throws if a level is out of 1..k-1.
    static std::size_t combo_offset(const FactorSpace& space, const VarSet& vars,
                                    const std::vector<int>& levels);
    static std::size_t combo_count(const FactorSpace& space, const VarSet& vars);

    /// Coordinates (indices into the parameter vector) of the given terms.
    std::vector<std::size_t> coordinates(const std::vector<VarSet>& terms) const;

private:
    std::vector<TermBlock> blocks_;
    std::size_t count_ = 0;
};

/// All nonempty subsets of `vars`, ordered by size then lexicographically.
std::vector<VarSet> nonempty_subsets(const VarSet& vars);

/// Contrast rows H (k-1 x k) with H * 1 = 0.
Eigen::MatrixXd build_H(const FactorSpace& space, Coding coding);

/// 0/1 design G (k x k-1) with H * G = I. Rc columns are indicators of
/// {y_v = x_v for v in I}; Ac columns are indicators of {y_v >= x_v}.
Eigen::MatrixXd build_G(const FactorSpace& space, Coding coding);

}  // namespace mll
