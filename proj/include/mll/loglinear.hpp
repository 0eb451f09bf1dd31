#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "mll/coding.hpp"
#include "mll/tables.hpp"

namespace mll {

/// Canonical log-linear parameters of a full table, ordered by TermIndex.
struct ThetaVector {
    Eigen::VectorXd values;
    Coding coding = Coding::Rc;
};

/// Mean parameters G'p, ordered by TermIndex.
struct MuVector {
    Eigen::VectorXd values;
    Coding coding = Coding::Rc;
};

/// Cells below this are rejected by anything that takes log p.
inline constexpr double kPositivityFloor = 1e-300;
/// Cells below this trigger a warning.
inline constexpr double kPositivityWarn = 1e-12;

using WarningHandler = std::function<void(const std::string&)>;
/// Installs a process-wide handler for numerical warnings; returns the old one.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

/// Throws PositivityError naming the first cell below kPositivityFloor.
void require_positive(const Table& p, const std::string& context);

/// max-shifted log(sum(exp(x))).
double log_sum_exp(const Eigen::VectorXd& x);

/// log p = G theta - log(1' exp(G theta)).
Table p_from_theta(const ThetaVector& theta, const FactorSpace& space);

/// theta = H log p.
ThetaVector theta_from_p(const Table& p, Coding coding);

/// mu = G' p.
MuVector mean_params(const Table& p, Coding coding);

/// Omega(p) = diag(p) - p p'.
Eigen::MatrixXd omega(const Eigen::VectorXd& p);

/// G_I' Omega(p) G_I for the interaction set I, i.e. d mu_I / d theta_I'.
Eigen::MatrixXd cov_block(const Table& p, const VarSet& term, Coding coding = Coding::Rc);
Eigen::MatrixXd cov_block(const Table& p, const std::vector<std::string>& term,
                          Coding coding = Coding::Rc);

/// G' Omega(p) G over every canonical coordinate (per-observation information).
Eigen::MatrixXd canonical_information(const Table& p, Coding coding);

inline Eigen::VectorXd as_vector(const Table& t) {
    return Eigen::Map<const Eigen::VectorXd>(t.values.data(), static_cast<Eigen::Index>(t.values.size()));
}

}  // namespace mll
