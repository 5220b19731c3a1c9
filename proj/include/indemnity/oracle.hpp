#pragma once

#include <string>
#include <utility>
#include <vector>

#include "indemnity/loss_model.hpp"
#include "indemnity/numerics.hpp"
#include "indemnity/preferences.hpp"
#include "indemnity/problem.hpp"

namespace indemnity {

// Finite-dimensional restriction of the retention problem: on a uniform
// quantile grid, the decision is the per-cell increment g_i of the retention
// quantile G, boxed by the loss quantile's own cell increment. Within a cell
// the increments realize G rising along the loss quantile itself at constant
// rate r_i = g_i / cap_i <= 1, so the pointwise slope bound holds everywhere
// and every discrete solution is a genuinely feasible retention. Weights are
// exact per-cell increments of T (never T' point values), which keeps the
// discrete objective finite at the z=1 blow-up of T'.
struct DiscretizedProgram {
    int n = 0;
    std::vector<double> z;       // n+1 uniform nodes on [0,1]
    std::vector<double> cap;     // cell bound: F^-1(z_{i+1}) - F^-1(z_i)
    std::vector<double> weight;  // T(z_{i+1}) - T(z_i)
    std::vector<double> fill;    // exact d(volume)/d(g_i) of the realization
    std::vector<double> tfill;   // exact d(integral of G dT)/d(g_i) of it
    std::vector<double> g;       // decision increments, 0 <= g_i <= cap_i
    double delta = 0.0;          // target retained volume
};

// Result of the brute-force maximization. `objective` is the exact quadrature
// of the feasible retention the increments realize (rising along the loss
// quantile within each cell), so the oracle value is a guaranteed lower bound
// on the continuum optimum; the continuous solver's objective should weakly
// dominate it at every grid size.
struct OracleSolution {
    double objective = 0.0;
    std::vector<double> increments;
    double lambda = 0.0;  // dual multiplier of the volume constraint
    // (lambda, volume) pairs from the dual search; volume is increasing in
    // lambda. Empty for the linear (risk-neutral) fast path.
    std::vector<std::pair<double, double>> lambda_trace;
    DiscretizedProgram program;
};

// Maximizes sum_i u(W_Delta - Gbar_i) weight_i over the box subject to the
// exact volume equality, by bisection on the dual multiplier with an inner
// projected coordinate ascent (risk-neutral utility reduces to a continuous
// knapsack and is solved directly). n >= 100. Throws InfeasibleDelta when the
// target volume exceeds the box's maximum, NonConvergent when the dual search
// stalls.
OracleSolution oracle_solve(const ProblemSpec& problem, const UtilitySpec& u,
                            const WeightingSpec& w, const LossModel& loss,
                            int n, const Tolerance& tol = {});

struct OptimalityViolation {
    double z = 0.0;
    double n_value = 0.0;  // variational residual N at z
    std::string regime;    // "flat" | "slope" | "kink"
    double severity = 0.0;
};

// Outcome of the variational check: the candidate is optimal exactly when the
// residual N is nonpositive where its retention is flat, nonnegative where the
// retention rises at the cap, and zero at the kinks, with the premium binding.
struct OptimalityReport {
    double lambda_star = 0.0;
    std::vector<OptimalityViolation> violations;  // entries above tolerance
    double max_violation = 0.0;
    double premium_residual = 0.0;
    double tolerance = 0.0;  // 1e-6 * (1 + lambda_star)
    bool verdict = false;
};

// Evaluates the full necessary-and-sufficient condition for `candidate` on a
// 500-point grid plus the contract's own breakpoints. The multiplier is
// reconstructed from the candidate's top flat level; when the volume
// constraint is slack (Delta <= 0) the slack multiplier 0 is used instead.
// Full retention (no coverage) is feasibility-checked only: it is the sole
// feasible point of its budget, and no finite multiplier exists there.
OptimalityReport check_optimality(const ProblemSpec& problem,
                                  const UtilitySpec& u, const WeightingSpec& w,
                                  const LossModel& loss,
                                  const Contract& candidate,
                                  const Tolerance& tol = {});

// Objective value of a contract: integral of u(W_Delta - G) dT over [0,1],
// flat retention pieces taken exactly via T increments. The common yardstick
// for solver-vs-oracle comparisons.
double contract_objective(const ProblemSpec& problem, const UtilitySpec& u,
                          const WeightingSpec& w, const LossModel& loss,
                          const Contract& contract, const Tolerance& tol = {});

}  // namespace indemnity
