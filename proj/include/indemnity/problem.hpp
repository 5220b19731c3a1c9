#pragma once

#include "indemnity/loss_model.hpp"

namespace indemnity {

// One insurance purchase decision: initial wealth W0, premium pi, safety
// loading rho. The derived quantities are fixed at construction:
//   Delta   = E[X] - pi/(1+rho)   (retained volume when the premium binds)
//   W       = W0 - (1+rho)E[X]    (wealth under full coverage priced at load)
//   W_Delta = W0 - pi             (wealth after paying the premium)
struct ProblemSpec {
    double W0 = 0.0;
    double pi = 0.0;
    double rho = 0.0;

    double Delta = 0.0;
    double W = 0.0;
    double W_Delta = 0.0;

    // Solvency diagnostics. uniform_solvency: W0 - (1+rho)E[X] - M >= 0, the
    // premium-independent worst case. worst_case_solvent: W0 - pi - M >= 0,
    // the floor under full retention at this premium. Both informational:
    // utilities defined on all of R (identity, exponential) tolerate negative
    // wealth, so the hard guard lives in the solvers and validators that know
    // the utility's domain.
    bool uniform_solvency = false;
    bool worst_case_solvent = false;
};

// Validates rho >= 0 and pi >= 0 (InvalidParameter otherwise) and fills in the
// derived quantities and solvency flags.
ProblemSpec make_problem(double W0, double pi, double rho, const LossModel& loss);

}  // namespace indemnity
