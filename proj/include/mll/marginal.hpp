#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mll/coding.hpp"
#include "mll/loglinear.hpp"
#include "mll/roles.hpp"
#include "mll/tables.hpp"

namespace mll {

/// Interaction `effect` computed inside the marginal table over `margin`,
/// with margin variables outside the effect held at level 0.
struct MLLTerm {
    VarSet effect;
    VarSet margin;
    Coding coding = Coding::Rc;
    /// Level combinations (in effect order, each level >= 1) left out of the
    /// parameter vector.
    std::vector<std::vector<int>> deleted;

    std::size_t full_size(const FactorSpace& space) const { return TermIndex::combo_count(space, effect); }
    /// Indices into the full combination list that remain after deletion.
    std::vector<std::size_t> retained(const FactorSpace& space) const;
};

MLLTerm make_term(const FactorSpace& space, const std::vector<std::string>& effect,
                  const std::vector<std::string>& margin, Coding coding = Coding::Rc);

/// Ordered list of marginal log-linear terms over one space.
struct MLLSpec {
    FactorSpace space;
    std::vector<MLLTerm> terms;

    std::size_t parameter_count() const;
    /// Offset of each term's first retained coordinate.
    std::vector<std::size_t> offsets() const;
    /// Coordinate of (term, full combination j); nullopt if deleted.
    std::optional<std::size_t> coordinate(std::size_t term, std::size_t j) const;
    /// Human-readable label "effect|margin|levels" for a coordinate.
    std::string label(std::size_t coordinate) const;
};

/// Structural checks: nonempty effects inside their margins, every
/// interaction set covered, duplicates only in the marginal-plus-joint
/// pattern, and exactly total_cells - 1 retained coordinates.
void validate(const MLLSpec& spec);

/// All combinations of one term, ignoring deletions.
Eigen::VectorXd lambda_term(const Table& p, const MLLTerm& term);

/// Concatenated retained coordinates of every term, length total_cells - 1.
Eigen::VectorXd mll_vector(const Table& p, const MLLSpec& spec);

/// d mll_vector / d theta' with theta the canonical parameters of the joint
/// in `theta_coding`. Square; nonsingular iff the spec is locally smooth at p.
Eigen::MatrixXd mll_jacobian(const Table& p, const MLLSpec& spec, Coding theta_coding = Coding::Rc);

struct Conditioning {
    double min_singular = 0.0;
    double max_singular = 0.0;
    double condition = 0.0;
};
Conditioning conditioning(const Eigen::MatrixXd& m);
/// Throws ConditioningError (quoting the condition estimate) when the
/// smallest singular value is below `threshold`.
void require_nonsingular(const Eigen::MatrixXd& m, double threshold, const std::string& context);

/// Central-difference Jacobian of lambda_{I,M} w.r.t. theta_I of the joint
/// (Rc), every other canonical coordinate held fixed.
Eigen::MatrixXd prop2_jacobian_check(const Table& p, const std::vector<std::string>& effect,
                                     const std::vector<std::string>& margin, double h = 1e-5);

/// Two Rc canonical vectors that differ only in the exposure-by-response
/// block. Returns (marginal XY interaction difference, canonical XY difference).
std::pair<Eigen::VectorXd, Eigen::VectorXd> example1_shift(const FactorSpace& space, const ThetaVector& first,
                                                           const ThetaVector& second,
                                                           const std::string& exposure,
                                                           const std::string& response);

/// Smooth parametrization of XWY with the XY interaction defined both in the
/// XY margin and in the joint. The three-way term X-mediators-Y drops the
/// coordinates where every mediator sits at `deleted_level` (default: each
/// mediator's highest level). Rc coding throughout.
MLLSpec build_prop3_spec(const FactorSpace& space, const Roles& roles,
                         std::optional<std::vector<int>> deleted_level = std::nullopt);

}  // namespace mll
