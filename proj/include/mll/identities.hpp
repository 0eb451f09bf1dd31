#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "mll/loglinear.hpp"
#include "mll/roles.hpp"
#include "mll/tables.hpp"

namespace mll {

// Identities relating interactions computed in nested margins. All of them
// use reference-category (Rc) contrasts. Functions taking Roles expect a
// three-variable XWY space with a single mediator W and a binary response Y.

/// lambda_{I;M} - lambda_{I;N} for I in N, N a proper subset of M, through
/// the alternating sum of log P(x_R = 0 | x_J, 0) over J subset of I.
/// One entry per non-baseline combination of I.
Eigen::VectorXd evans_difference(const Table& p, const std::vector<std::string>& effect,
                                 const std::vector<std::string>& inner,
                                 const std::vector<std::string>& outer);

/// theta_XY(x,y) - lambda_{XY;XY}(x,y) from the joint canonical parameters,
/// as a difference of two log ratios of mediator normalising constants.
double c1_from_loglinear(const ThetaVector& theta, const FactorSpace& space, const Roles& roles, int x, int y);

/// Same quantity along the conditional-probability route: mediator logits
/// given (X, Y) are rebuilt from P(Y | X, W) and P(W | X) by swapping the
/// conditioning, then combined into the odds ratio of P(W = 0 | x, y).
double sd_delta(const Table& p, const Roles& roles, int x, int y);

/// Both sides of log P(W=w|Y=1,x) / P(W=w|Y=0,x) = logit P(Y|x,w) - logit P(Y|x).
std::pair<double, double> sd_response_identity(const Table& p, const Roles& roles, int x, int w);

/// log P(W=w|x,y) / P(W=0|x,y) through the extended expansion: the response
/// terms use joint canonical parameters, the mediator terms use the XW-margin
/// interactions lambda_{W;XW} and lambda_{XW;XW}.
double mediator_logit_expansion(const Table& p, const Roles& roles, int x, int w, int y);

/// Logistic coefficients implied by Rc canonical parameters of XWY.
struct LogitMap {
    int kx = 0, kw = 0, ky = 0;
    /// logit P(Y=1 | x, w), indexed x * kw + w.
    std::vector<double> response;
    /// log P(W=w | x, y) / P(W=0 | x, y), indexed (x * ky + y) * kw + w.
    std::vector<double> mediator;

    double response_logit(int x, int w) const { return response[static_cast<std::size_t>(x * kw + w)]; }
    double mediator_logit(int x, int y, int w) const {
        return mediator[static_cast<std::size_t>((x * ky + y) * kw + w)];
    }
};

LogitMap logits_from_loglinear(const ThetaVector& theta, const FactorSpace& space, const Roles& roles);

/// Canonical coordinate of the interaction among the assigned variables at
/// the assigned levels; 0 when any level is the baseline.
double theta_at(const ThetaVector& theta, const FactorSpace& space, const Assignment& levels);

}  // namespace mll
