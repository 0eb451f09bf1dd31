#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mll {

struct VerifyOptions {
    std::uint64_t seed = 0;
    int trials = 100;
    /// Replaces every per-identity tolerance when set.
    std::optional<double> tolerance;
};

struct CheckResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    int instances = 0;
    bool pass = false;
};

/// Runs every algebraic identity of the library on seeded random tables.
std::vector<CheckResult> run_identity_suite(const VerifyOptions& options);

/// One PASS/FAIL line per identity plus a closing count. Byte-identical for
/// identical results.
std::string format_report(const std::vector<CheckResult>& results);

}  // namespace mll
