#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mll {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: unknown variables, bad level values, inconsistent specs.
class SpecificationError : public Error {
public:
    using Error::Error;
};

/// Errors arising from the numbers rather than the shape of the input.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A cell (or margin cell) that must be strictly positive is not.
class PositivityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Zero total mass, zero conditioning slice and similar.
class DegenerateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Pairwise marginals that disagree on a shared one-way margin.
class ConsistencyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Singular or indefinite matrix where a positive definite one is required.
class ConditioningError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An iterative method stopped before meeting its tolerance.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double residual, std::vector<double> trace = {})
        : NumericalError(what), residual_(residual), trace_(std::move(trace)) {}

    double residual() const noexcept { return residual_; }
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    double residual_;
    std::vector<double> trace_;
};

/// Too many failed bootstrap replicates.
class ReliabilityError : public NumericalError {
public:
    ReliabilityError(const std::string& what, int failures)
        : NumericalError(what), failures_(failures) {}

    int failures() const noexcept { return failures_; }

private:
    int failures_;
};

}  // namespace mll
