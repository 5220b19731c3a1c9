#pragma once

#include "indemnity/landmarks.hpp"
#include "indemnity/loss_model.hpp"
#include "indemnity/numerics.hpp"
#include "indemnity/preferences.hpp"
#include "indemnity/problem.hpp"

namespace indemnity {

// Residual diagnostics for a fitted threefold contract: how far the inner
// stationarity equation and the premium constraint are from zero at the
// returned pair.
struct ThreefoldResidual {
    double z2 = 0;                // lower quantile breakpoint, in [0, a]
    double z1 = 0;                // upper quantile breakpoint, in [a, 1)
    double inner_residual = 0;    // stationarity equation at (z2, z1)
    double premium_residual = 0;  // | retained volume - Delta |
};

// Full description of a solved risk-averse problem: the contract, the
// multiplier certifying it, the pair residuals (threefold regime only), and
// the landmark quantities the regime dispatch was based on.
struct RduSolution {
    Contract contract;
    double lambda_star = 0;
    ThreefoldResidual residual;
    RduLandmarks landmarks;
    LandmarkCertificate weighting_landmarks;
    bool boundary = false;  // regime decided within tolerance of a threshold
};

// Solves for the threefold pair (z2, z1) binding the premium at the given
// retained volume `delta`. Outer bisection runs over z2 in [0, a]; for each
// z2 the inner stationarity equation pins z1 in [a, 1). Throws NoBracket if
// no sign change exists for the outer equation.
ThreefoldResidual solve_threefold_pair(const ProblemSpec& problem,
                                       const UtilitySpec& u,
                                       const WeightingSpec& w,
                                       const LossModel& loss, double delta,
                                       const Tolerance& tol = {});

// Solves for the deductible quantile q with retained volume Delta(q) = delta,
// searching the given bracket [lo, hi] (quantile space). Throws NoBracket if
// Delta(q) - delta does not change sign over the bracket.
double solve_deductible(const ProblemSpec& problem, const UtilitySpec& u,
                        const WeightingSpec& w, const LossModel& loss,
                        double delta, const Bracket& regime_bracket,
                        const Tolerance& tol = {});

// Computes the optimal indemnity schedule for a risk-averse policyholder
// (strictly concave utility) with an inverse-S probability weighting. The
// regime is decided by comparing the retained volume Delta against the
// landmark thresholds; for strictly-DARA utilities the two-threshold band
// dispatch applies. Identity utility is rejected (use solve_yaari).
RduSolution solve_rdu_detailed(const ProblemSpec& problem, const UtilitySpec& u,
                               const WeightingSpec& w, const LossModel& loss,
                               const Tolerance& tol = {});

Contract solve_rdu(const ProblemSpec& problem, const UtilitySpec& u,
                   const WeightingSpec& w, const LossModel& loss,
                   const Tolerance& tol = {});

}  // namespace indemnity
