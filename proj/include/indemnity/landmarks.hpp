#pragma once

#include <mutex>
#include <optional>

#include "indemnity/loss_model.hpp"
#include "indemnity/numerics.hpp"
#include "indemnity/preferences.hpp"
#include "indemnity/problem.hpp"

namespace indemnity {

// Structural landmarks of a weighting function:
//   b          minimizer of T' (where concavity flips to convexity),
//   a          root of p(z) = (1-T(z)) - T'(z)(1-z), equivalently the
//              minimizer of f(z) = (1-T(z))/(1-z),
//   c          fixed point T(c) = c on (a,1], c = 1 if none interior,
//   lambda_hat f(a) = T'(a) < 1, the multiplier below which full coverage
//              stops being optimal.
struct LandmarkCertificate {
    double b = 0.0;
    double a = 0.0;
    double c = 0.0;
    double lambda_hat = 0.0;
};

namespace detail {
struct LandmarkCache {
    std::once_flag once;
    std::optional<LandmarkCertificate> cert;
};
}  // namespace detail

// f(z) = (1 - T(z)) / (1 - z); strictly decreasing on [0,a], strictly
// increasing on [a,1), divergent at 1.
double f_value(const WeightingSpec& w, double z);

// Computes (and memoizes per weighting) the landmark certificate. The roots are
// re-verified by sign checks on both sides; LandmarkNotFound names the bracket
// that failed.
LandmarkCertificate compute_landmarks(const WeightingSpec& w,
                                      const Tolerance& tol = {});

// k_of(t) = int_0^t F^-1(z) dz + F^-1(t) (1 - t): the retained volume of a
// deductible at quantile t. Strictly increasing from 0 to E[X].
double k_of(double threshold, const LossModel& loss, const Tolerance& tol = {});

// Same map under the name used by the regime dispatch; domain of interest
// is [a, c] there.
double delta_of_d(double d, const LossModel& loss, const Tolerance& tol = {});

// Variational residual N_lambda(z) = int_z^1 [lambda - u'(W_Delta - G(t)) T'(t)] dt.
// The solved contracts are optimal exactly when N <= 0 where G' = 0 and
// N >= 0 where G' is at the slope cap. Identity utility reduces to the
// closed form lambda (1-z) - (1-T(z)), which is used directly.
double n_lambda(const ProblemSpec& problem, const UtilitySpec& u,
                const WeightingSpec& w, const QuantileSolution& G, double lambda,
                double z, const Tolerance& tol = {});

// h_Delta(z) = z u'(W_Delta - F^-1(z)) f(z) - int_0^z u'(W_Delta - F^-1(t)) T'(t) dt
// on [a, c]; negative at a, positive at c, strictly increasing through its
// unique root l_Delta.
double h_delta(const ProblemSpec& problem, const UtilitySpec& u,
               const WeightingSpec& w, const LossModel& loss, double z,
               const Tolerance& tol = {});

// Root of h_Delta on (a, c). Throws BracketInvalid when the sign conditions
// h(a) < 0 < h(c) fail, which signals an assumption violation upstream.
double find_l_delta(const ProblemSpec& problem, const UtilitySpec& u,
                    const WeightingSpec& w, const LossModel& loss,
                    const Tolerance& tol = {});

// g(p) = h evaluated at the premium level whose bound retention volume is
// Delta(p), i.e. with wealth W0 - (1+rho)(E[X] - Delta(p)). Its sign at the
// point p where Delta(p) matches the problem's own Delta decides between the
// deductible and threefold shapes in the middle band of the decreasing-ARA
// dispatch.
double g_value(double p, double W0, double rho, const UtilitySpec& u,
               const WeightingSpec& w, const LossModel& loss,
               const Tolerance& tol = {});

// Landmarks of the concave-utility dispatch. For constant-ARA utilities
// l_Delta is premium-independent and the two bands collapse:
// l_Delta_a = l_Delta_c = l_Delta, Delta_tilde = Delta_bar = K_Delta.
struct RduLandmarks {
    double l_Delta = 0.0;   // root of h at the problem's own wealth
    double K_Delta = 0.0;   // Delta(l_Delta)
    double l_Delta_a = 0.0; // root of h at wealth consistent with Delta(a)
    double l_Delta_c = 0.0; // root of h at wealth consistent with Delta(c)
    double Delta_tilde = 0.0;  // Delta(l_Delta_a)
    double Delta_bar = 0.0;    // Delta(l_Delta_c)
};

RduLandmarks compute_rdu_landmarks(const ProblemSpec& problem,
                                   const UtilitySpec& u, const WeightingSpec& w,
                                   const LossModel& loss,
                                   const Tolerance& tol = {});

namespace detail {
// h with an explicit wealth argument; the public h_delta and g_value are
// thin wrappers. Exposed for the solver modules.
double h_at_wealth(double wealth, const UtilitySpec& u, const WeightingSpec& w,
                   const LossModel& loss, double z, const Tolerance& tol);
double find_l_at_wealth(double wealth, const UtilitySpec& u,
                        const WeightingSpec& w, const LossModel& loss,
                        const LandmarkCertificate& cert, const Tolerance& tol);
}  // namespace detail

}  // namespace indemnity
