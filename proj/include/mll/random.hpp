#pragma once

#include <cstdint>
#include <random>

#include "mll/loglinear.hpp"
#include "mll/tables.hpp"

namespace mll {

using Rng = std::mt19937_64;

/// Strictly positive probability table with log-cells ~ N(0, scale^2).
Table random_positive_table(const FactorSpace& space, Rng& rng, double scale = 1.0);

/// Canonical vector with entries ~ N(0, scale^2).
ThetaVector random_theta(const FactorSpace& space, Rng& rng, double scale = 1.0, Coding coding = Coding::Rc);

}  // namespace mll
