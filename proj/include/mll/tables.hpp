#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mll {

struct Variable {
    std::string name;
    int levels = 2;
};

/// Sorted list of variable positions within a FactorSpace.
using VarSet = std::vector<std::size_t>;

/// Ordered list of categorical variables. Cells are laid out row-major with
/// the last declared variable varying fastest; level 0 is the baseline.
class FactorSpace {
public:
    FactorSpace() = default;
    explicit FactorSpace(std::vector<Variable> variables);

    std::size_t size() const noexcept { return vars_.size(); }
    std::size_t total_cells() const noexcept { return total_; }
    const std::vector<Variable>& variables() const noexcept { return vars_; }
    const Variable& variable(std::size_t pos) const { return vars_.at(pos); }
    int levels(std::size_t pos) const { return vars_.at(pos).levels; }
    std::size_t stride(std::size_t pos) const { return strides_.at(pos); }

    /// Position of a variable; throws SpecificationError if unknown.
    std::size_t position(const std::string& name) const;
    bool contains(const std::string& name) const;

    /// Positions of the named variables, sorted into declaration order.
    VarSet positions(const std::vector<std::string>& names) const;
    std::vector<std::string> names(const VarSet& positions) const;

    std::size_t cell_index(std::span<const int> levels) const;
    std::vector<int> decode(std::size_t cell) const;
    int level_of(std::size_t cell, std::size_t pos) const {
        return static_cast<int>((cell / strides_[pos]) % static_cast<std::size_t>(vars_[pos].levels));
    }

    /// The space restricted to the given positions, in declaration order.
    FactorSpace subspace(const VarSet& positions) const;

    bool operator==(const FactorSpace& other) const;

private:
    std::vector<Variable> vars_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 1;
};

enum class TableKind { Counts, Probabilities };

/// Nonnegative values over the cells of a FactorSpace.
struct Table {
    FactorSpace space;
    std::vector<double> values;
    TableKind kind = TableKind::Probabilities;

    Table() = default;
    Table(FactorSpace s, std::vector<double> v, TableKind k);

    double total() const;
    double min_value() const;
    bool strictly_positive() const { return min_value() > 0.0; }
    double at(std::span<const int> levels) const { return values[space.cell_index(levels)]; }
};

/// Partial assignment of levels to named variables.
using Assignment = std::map<std::string, int>;

/// Sums out every variable not in `keep`; the result keeps declaration order.
Table marginalize(const Table& t, const std::vector<std::string>& keep);
Table marginalize(const Table& t, const VarSet& keep);

/// Distribution of the remaining variables given a partial assignment.
Table condition(const Table& t, const Assignment& given);

/// Counts divided by their total.
Table normalize(const Table& counts);

/// Matrix-free marginalization map: index of the margin cell for each joint cell.
std::vector<std::size_t> margin_cell_map(const FactorSpace& space, const VarSet& keep);

}  // namespace mll
