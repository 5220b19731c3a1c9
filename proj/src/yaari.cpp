#include "indemnity/yaari.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace indemnity {

double pi_c(const WeightingSpec& w, const LossModel& loss, double rho,
            const Tolerance& tol) {
    const LandmarkCertificate cert = compute_landmarks(w, tol);
    const double K_c = k_of(cert.c, loss, tol);
    return (1.0 + rho) * (loss.mean - K_c);
}

YaariSolution solve_yaari_detailed(const ProblemSpec& problem,
                                   const WeightingSpec& w, const LossModel& loss,
                                   const Tolerance& tol) {
    YaariSolution sol;
    sol.landmarks = compute_landmarks(w, tol);
    sol.K_c = k_of(sol.landmarks.c, loss, tol);
    sol.pi_c = (1.0 + problem.rho) * (loss.mean - sol.K_c);

    const double ceiling = (1.0 + problem.rho) * loss.mean;
    const double band = 1e-9 * (1.0 + ceiling);

    if (problem.pi >= ceiling - band) {
        sol.contract = Contract::full();
        sol.lambda_star = sol.landmarks.lambda_hat;
        sol.boundary = std::fabs(problem.pi - ceiling) <= band;
        return sol;
    }

    const double delta = problem.Delta;

    if (std::fabs(problem.pi - sol.pi_c) <= band) {
        // Both closed forms coincide here (d = 0, e = c versus q = c).
        sol.contract = Contract::threefold(0.0, sol.landmarks.c);
        sol.lambda_star = 1.0;
        sol.boundary = true;
    } else if (problem.pi > sol.pi_c) {
        // Threefold regime: parametrize by the upper quantile e in (a, c].
        // lambda = f(e) fixes the partner d = f^-1(lambda) on [0, a], and the
        // retained volume k(e) - k(d(e)) is strictly increasing in e with a
        // bounded, nonvanishing derivative. (Bisecting lambda instead is
        // ill-conditioned: the volume has a square-root cusp at lambda_hat,
        // which loses half the working precision exactly when Delta is small.)
        const LandmarkCertificate& lc = sol.landmarks;
        auto d_of = [&](double e) {
            const double lambda = f_value(w, e);
            const double at_a = lc.lambda_hat - lambda;  // f(a) - lambda
            if (at_a >= 0.0) return lc.a;  // rounding put f(e) at the minimum
            if (lambda >= 1.0) return 0.0;  // e at c: f(c) = 1 up to rounding
            // f decreasing on [0,a] with f(0) = 1 > lambda.
            auto offset = [&](double z) { return f_value(w, z) - lambda; };
            return find_root(offset, Bracket{0.0, lc.a, 1.0 - lambda, at_a},
                             tol);
        };
        auto volume_gap = [&](double e) {
            return (k_of(e, loss, tol) - k_of(d_of(e), loss, tol)) - delta;
        };
        const double hi_e = lc.c >= 1.0 ? 1.0 - 1e-9 : lc.c;
        const double gap_hi = volume_gap(hi_e);
        if (!(gap_hi > 0.0))
            throw SolverFailed(
                "solve_yaari: threefold volume cannot reach Delta = " +
                std::to_string(delta) + " below e = " + std::to_string(hi_e));
        const double e =
            find_root(volume_gap, Bracket{lc.a, hi_e, -delta, gap_hi}, tol);
        const double d = d_of(e);
        sol.contract = Contract::threefold(d, e);
        sol.lambda_star = f_value(w, e);
    } else {
        // Deductible regime: retained volume Delta(q) is strictly increasing,
        // spanning [K_c, E[X]] for q in [c, 1].
        auto gap = [&](double q) { return k_of(q, loss, tol) - delta; };
        double q;
        if (gap(1.0) <= 0.0) {
            q = 1.0;  // pi = 0: zero budget, I* identically 0
        } else {
            q = find_root(gap, make_bracket(gap, sol.landmarks.c, 1.0), tol);
        }
        sol.contract = Contract::deductible(q);
        sol.lambda_star = q >= 1.0 - 1e-12
                              ? std::numeric_limits<double>::quiet_NaN()
                              : f_value(w, q);
    }

    sol.premium_residual = std::fabs(expected_indemnity(loss, sol.contract, tol) -
                                     problem.pi / (1.0 + problem.rho));
    if (sol.premium_residual > 1e-7 * (1.0 + loss.mean))
        throw SolverFailed(
            "solve_yaari: premium residual " + std::to_string(sol.premium_residual) +
            " after the regime solve; inputs are outside the tested envelope");
    return sol;
}

Contract solve_yaari(const ProblemSpec& problem, const WeightingSpec& w,
                     const LossModel& loss, const Tolerance& tol) {
    return solve_yaari_detailed(problem, w, loss, tol).contract;
}

}  // namespace indemnity
