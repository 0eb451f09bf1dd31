#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mll/fit.hpp"
#include "mll/roles.hpp"
#include "mll/tables.hpp"

namespace mll {

/// Risk-difference natural effects of moving the exposure from x0 to x1.
/// nde keeps the mediators at their x0 law; nie evaluates the response at x1.
struct NaturalEffects {
    double nde = 0.0;
    double nie = 0.0;
    double te = 0.0;
};

NaturalEffects natural_effects(const Table& p, const Roles& roles, int x0, int x1);

using Transition = std::pair<int, int>;

/// (0,1), (1,2), ..., (k-2,k-1).
std::vector<Transition> adjacent_transitions(int levels);

struct MediationResult {
    std::vector<Transition> transitions;
    std::vector<double> nde, nie, te;
    std::vector<double> se_nde, se_nie, se_te;
    int replicates = 0;
    std::vector<std::string> warnings;
};

/// Effects on the fitted table for every transition, with bootstrap standard
/// errors from refitting `spec` to resampled `counts`.
MediationResult mediation_table(const FitResult& fit, const Table& counts, const ModelSpec& spec, const Roles& roles,
                                const std::vector<Transition>& transitions, int B = 500, std::uint64_t seed = 0,
                                unsigned threads = 0);

}  // namespace mll
