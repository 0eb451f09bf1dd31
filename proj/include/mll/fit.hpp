#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mll/marginal.hpp"
#include "mll/tables.hpp"

namespace mll {

/// sum_i coefficient_i * eta[coordinate_i] = 0
struct LinearConstraint {
    std::vector<std::pair<std::size_t, double>> coefficients;
};

/// A marginal log-linear parametrization plus equality constraints on its
/// coordinates.
struct ModelSpec {
    MLLSpec mll;
    std::vector<std::size_t> zero_constraints;
    std::vector<LinearConstraint> linear_constraints;

    /// One row per constraint over the mll coordinates.
    Eigen::MatrixXd constraint_matrix() const;
};

/// Number of independent constraint rows; throws SpecificationError when the
/// constraint rows are linearly dependent or refer to missing coordinates.
int count_dof(const ModelSpec& spec);

struct FitOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-8;
    double constraint_tolerance = 1e-10;
    int max_halvings = 20;
    /// When false a non-converged result is returned with converged = false.
    bool throw_on_failure = true;
};

struct FitResult {
    Table p_hat;
    Eigen::VectorXd eta_hat;
    /// Asymptotic covariance of eta_hat (all coordinates, zero rows/columns
    /// for zero-constrained ones).
    Eigen::MatrixXd covariance;
    double deviance = 0.0;
    int dof = 0;
    int iterations = 0;
    bool converged = false;
    double max_grad = 0.0;
    double max_constraint = 0.0;
    /// Merit value (mean log-likelihood minus constraint penalty) after each accepted step.
    std::vector<double> trace;
    std::vector<std::string> warnings;
};

/// Multinomial log-likelihood sum n_i log p_i with 0 log 0 = 0.
double log_likelihood(const Table& counts, const Table& p);

/// 2 * sum n_i log(n_i / (N p_i)) with 0 log 0 = 0.
double deviance(const Table& counts, const Table& p);

/// Constrained maximum likelihood by Aitchison-Silvey Newton steps over the
/// Rc canonical parameters of the joint table, started at the uniform table.
FitResult fit_mle(const Table& counts, const ModelSpec& spec, const FitOptions& options = {});

/// Square roots of the diagonal of fit.covariance (0 for constrained coordinates).
Eigen::VectorXd standard_errors(const FitResult& fit, const ModelSpec& spec);

/// Multinomial draw of n observations from p; reproducible for a given seed.
Table simulate(const Table& p, std::int64_t n, std::uint64_t seed);

using Statistic = std::function<Eigen::VectorXd(const FitResult&)>;

struct BootstrapResult {
    Eigen::VectorXd estimates;
    Eigen::VectorXd standard_errors;
    int replicates = 0;
    int failures = 0;
    std::vector<std::string> warnings;
};

/// Nonparametric bootstrap: replicate b resamples N cells from counts / N
/// with seed + b, refits and evaluates the statistic. Mean and standard
/// deviation over successful replicates. `threads` = 0 uses the hardware
/// concurrency; results do not depend on it.
BootstrapResult bootstrap(const Table& counts, const ModelSpec& spec, const Statistic& statistic, int B,
                          std::uint64_t seed, unsigned threads = 0, const FitOptions& options = {});

}  // namespace mll
