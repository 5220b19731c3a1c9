#pragma once

#include "indemnity/landmarks.hpp"
#include "indemnity/loss_model.hpp"
#include "indemnity/preferences.hpp"
#include "indemnity/problem.hpp"

namespace indemnity {

// Premium at which the dual-criterion optimum switches between the threefold
// and deductible shapes: pi_c = (1+rho)(E[X] - K_c) with K_c = k_of(c).
double pi_c(const WeightingSpec& w, const LossModel& loss, double rho,
            const Tolerance& tol = {});

struct YaariSolution {
    Contract contract;
    double lambda_star = 0.0;
    double premium_residual = 0.0;  // |E[I] - pi/(1+rho)| after the solve
    bool boundary = false;          // premium within tolerance of a regime edge
    LandmarkCertificate landmarks;
    double K_c = 0.0;
    double pi_c = 0.0;
};

// Optimal contract under the dual criterion (identity utility):
//   pi >= (1+rho)E[X]      -> Full,
//   pi_c < pi < that       -> Threefold(d, e) with f(d) = f(e), found by
//                             bisection on lambda in (lambda_hat, 1),
//   0 <= pi <= pi_c        -> Deductible(q) with q >= c.
// The premium binds in the nontrivial regimes. At pi = pi_c (within a
// relative band of 1e-9) both forms coincide; the threefold form with d = 0
// is returned and flagged.
YaariSolution solve_yaari_detailed(const ProblemSpec& problem,
                                   const WeightingSpec& w, const LossModel& loss,
                                   const Tolerance& tol = {});

Contract solve_yaari(const ProblemSpec& problem, const WeightingSpec& w,
                     const LossModel& loss, const Tolerance& tol = {});

}  // namespace indemnity
