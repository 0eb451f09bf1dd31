#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mll/coding.hpp"
#include "mll/tables.hpp"

namespace mll {

/// Split of all interaction sets of a space into U (canonical part) and V
/// (mean part). Only U is stored; V is its complement.
class MixedPartition {
public:
    MixedPartition() = default;
    MixedPartition(const FactorSpace& space, std::vector<VarSet> u_terms);
    static MixedPartition from_names(const FactorSpace& space,
                                     const std::vector<std::vector<std::string>>& u_terms);

    const std::vector<VarSet>& u_terms() const noexcept { return u_terms_; }
    std::vector<VarSet> v_terms() const;
    /// Canonical coordinates belonging to U and V, in TermIndex order.
    const std::vector<std::size_t>& u_coords() const noexcept { return u_coords_; }
    const std::vector<std::size_t>& v_coords() const noexcept { return v_coords_; }

private:
    std::vector<VarSet> all_terms_;
    std::vector<VarSet> u_terms_;
    std::vector<std::size_t> u_coords_;
    std::vector<std::size_t> v_coords_;
};

struct MixedParam {
    FactorSpace space;
    MixedPartition partition;
    Coding coding = Coding::Rc;
    Eigen::VectorXd mu_V;
    Eigen::VectorXd theta_U;
};

struct InversionOptions {
    double tolerance = 1e-10;
    int max_iterations = 200;
    int max_halvings = 20;
};

struct InversionReport {
    int iterations = 0;
    double residual = 0.0;
};

MixedParam split_mixed(const Table& p, const MixedPartition& partition, Coding coding = Coding::Rc);

/// Newton iteration on theta_V with theta_U fixed; throws ConvergenceError
/// (carrying the residual) when the target mean parameters are not reached.
Table invert_mixed(const MixedParam& m, const InversionOptions& options = {},
                   InversionReport* report = nullptr);

/// Joint XWY table from its three pairwise margins and the three-way
/// interaction (Rc). Variable order is taken from the first appearances in
/// (mXW, mXY, mWY).
Table reconstruct_from_pairwise(const Table& mXW, const Table& mXY, const Table& mWY,
                                const Eigen::VectorXd& theta_XWY);

struct InformationBlocks {
    Eigen::MatrixXd vv;
    Eigen::MatrixXd uu;
    Eigen::MatrixXd cross;
};

/// Expected (per-observation) information of (mu_V, theta_U) at p.
InformationBlocks information_blocks(const Table& p, const MixedPartition& partition,
                                     Coding coding = Coding::Rc);

}  // namespace mll
