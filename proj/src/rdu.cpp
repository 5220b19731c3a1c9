#include "indemnity/rdu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace indemnity {

namespace {

// Stationarity residual of the threefold pair: with lambda pinned by the top
// flat piece, lambda = u'(W_Delta - k) f(z1), the variational condition over
// the slope-1 middle piece reduces to
//   lambda (z1 - z2) - int_{z2}^{z1} u'(W_Delta - (F^-1(t) - F^-1(z2))) T'(t) dt.
double inner_residual_at(const ProblemSpec& problem, const UtilitySpec& u,
                         const WeightingSpec& w, const LossModel& loss,
                         double z2, double z1, const Tolerance& tol) {
    const double base = loss.quantile(z2);
    const double k = loss.quantile(z1) - base;
    const double lambda = u.deriv(problem.W_Delta - k) * f_value(w, z1);
    auto integrand = [&](double t) {
        return u.deriv(problem.W_Delta - (loss.quantile(t) - base)) * w.deriv(t);
    };
    return lambda * (z1 - z2) - integrate(integrand, z2, z1, tol);
}

// Upper breakpoint z1(z2): the root of the stationarity residual in z1 over
// [a, 1). The residual is nonpositive at a and diverges to +inf toward 1
// (f does), so a sign change exists; the bracket ceiling starts at c and
// is pushed toward 1 if needed.
double solve_inner_upper(const ProblemSpec& problem, const UtilitySpec& u,
                         const WeightingSpec& w, const LossModel& loss,
                         const LandmarkCertificate& cert, double z2,
                         const Tolerance& tol) {
    if (z2 >= cert.a - 1e-13) return cert.a;  // degenerate pair, zero volume

    auto residual = [&](double z1) {
        return inner_residual_at(problem, u, w, loss, z2, z1, tol);
    };
    const double lo = cert.a;
    const double r_lo = residual(lo);
    if (r_lo == 0.0) return lo;
    if (r_lo > 0.0) {
        if (cert.a - z2 < 1e-6) return lo;  // roundoff at the degenerate edge
        throw NoBracket("threefold inner equation: residual " +
                        std::to_string(r_lo) + " at z1=a for z2=" +
                        std::to_string(z2) + " has the wrong sign");
    }

    constexpr double kCeiling = 1.0 - 1e-9;
    double hi = std::min(cert.c < 1.0 ? cert.c : 0.5 * (cert.a + 1.0), kCeiling);
    double r_hi = residual(hi);
    for (int step = 0; r_hi < 0.0 && hi < kCeiling && step < 8; ++step) {
        hi = std::min(kCeiling, 0.5 * (hi + 1.0));
        r_hi = residual(hi);
    }
    if (r_hi < 0.0)
        throw NoBracket("threefold inner equation: no sign change for z1 in [" +
                        std::to_string(lo) + ", " + std::to_string(hi) +
                        "] at z2=" + std::to_string(z2));
    return find_root(residual, Bracket{lo, hi, r_lo, r_hi}, tol);
}

// Deductible quantile via the strictly increasing retained-volume map.
// Prefers the regime's own bracket; [0,1] always brackets when
// 0 < delta < E[X], and the root is unique, so fall back to it on a
// roundoff-tight regime bracket.
double deductible_root(const LossModel& loss, double delta, double lo, double hi,
                       const Tolerance& tol) {
    auto gap = [&](double q) { return k_of(q, loss, tol) - delta; };
    try {
        return find_root(gap, make_bracket(gap, lo, hi), tol);
    } catch (const NoSignChange&) {
        return find_root(gap, make_bracket(gap, 0.0, 1.0), tol);
    }
}

double premium_gap(const ProblemSpec& problem, const LossModel& loss,
                   const Contract& c, const Tolerance& tol) {
    return std::fabs(expected_indemnity(loss, c, tol) -
                     problem.pi / (1.0 + problem.rho));
}

}  // namespace

ThreefoldResidual solve_threefold_pair(const ProblemSpec& problem,
                                       const UtilitySpec& u,
                                       const WeightingSpec& w,
                                       const LossModel& loss, double delta,
                                       const Tolerance& tol) {
    if (!(delta > 0.0))
        throw InvalidParameter("solve_threefold_pair: retained volume delta=" +
                               std::to_string(delta) + " must be positive");
    const LandmarkCertificate cert = compute_landmarks(w, tol);
    auto inner = [&](double z2) {
        return solve_inner_upper(problem, u, w, loss, cert, z2, tol);
    };
    auto volume = [&](double z2, double z1) {
        return k_of(z1, loss, tol) - k_of(z2, loss, tol);
    };
    auto finish = [&](double z2, double z1) {
        return ThreefoldResidual{
            z2, z1, inner_residual_at(problem, u, w, loss, z2, z1, tol),
            std::fabs(volume(z2, z1) - delta)};
    };

    const double band = 1e-9 * (1.0 + loss.mean);
    const double z1_at_0 = inner(0.0);
    const double phi0 = volume(0.0, z1_at_0) - delta;  // K_Delta - delta
    if (std::fabs(phi0) <= band) return finish(0.0, z1_at_0);
    if (phi0 < 0.0)
        throw NoBracket(
            "solve_threefold_pair: delta=" + std::to_string(delta) +
            " is at or above the all-flat retained volume " +
            std::to_string(volume(0.0, z1_at_0)) +
            "; the deductible regime applies");

    auto phi = [&](double z2) { return volume(z2, inner(z2)) - delta; };
    // phi(a) = -delta exactly by the degenerate-pair convention.
    const double z2 =
        find_root(phi, Bracket{0.0, cert.a, phi0, -delta}, tol);
    return finish(z2, inner(z2));
}

double solve_deductible(const ProblemSpec&, const UtilitySpec&,
                        const WeightingSpec&, const LossModel& loss,
                        double delta, const Bracket& regime_bracket,
                        const Tolerance& tol) {
    if (!(delta > 0.0) || delta > loss.mean)
        throw InvalidParameter("solve_deductible: delta=" +
                               std::to_string(delta) +
                               " is outside (0, E[X]]");
    if (delta >= loss.mean) return 1.0;
    return deductible_root(loss, delta, regime_bracket.lo, regime_bracket.hi,
                           tol);
}

RduSolution solve_rdu_detailed(const ProblemSpec& problem, const UtilitySpec& u,
                               const WeightingSpec& w, const LossModel& loss,
                               const Tolerance& tol) {
    if (u.ara_class() == UtilitySpec::AraClass::Identity)
        throw UnsupportedARAClass(
            "solve_rdu: identity (risk-neutral) utility has a dedicated "
            "closed-form solver; use solve_yaari");
    if (u.requires_positive_wealth() && problem.W_Delta - loss.M <= 0.0)
        throw AssumptionViolated(
            "solve_rdu: utility is undefined at the worst-case wealth " +
            std::to_string(problem.W_Delta - loss.M) +
            " (W0 - pi must exceed the loss bound M)");

    RduSolution sol;
    sol.weighting_landmarks = compute_landmarks(w, tol);
    const double band = 1e-9 * (1.0 + loss.mean);
    const double delta = problem.Delta;

    if (delta <= band) {
        // Premium at or above the loaded full-coverage price: retain nothing.
        sol.contract = Contract::full();
        sol.lambda_star = 0.0;  // volume constraint is slack
        sol.boundary = std::fabs(delta) <= band;
        sol.residual.premium_residual = 0.0;
        return sol;
    }
    if (delta >= loss.mean - band) {
        // Zero budget: full retention. No finite multiplier certifies this
        // corner (T' diverges at 1), so lambda is reported as NaN.
        sol.contract = Contract::no_coverage();
        sol.lambda_star = std::numeric_limits<double>::quiet_NaN();
        sol.boundary = std::fabs(delta - loss.mean) <= band;
        sol.residual.premium_residual = premium_gap(problem, loss, sol.contract, tol);
        return sol;
    }

    sol.landmarks = compute_rdu_landmarks(problem, u, w, loss, tol);
    const LandmarkCertificate& cert = sol.weighting_landmarks;

    bool take_deductible;
    double ded_lo = sol.landmarks.l_Delta;
    if (u.ara_class() == UtilitySpec::AraClass::StrictlyDecreasingARA &&
        delta > sol.landmarks.Delta_tilde - band &&
        delta < sol.landmarks.Delta_bar + band) {
        // Middle band of the decreasing-ARA dispatch: the shape flips at the
        // sign of g evaluated at the matching deductible quantile p. When the
        // deductible wins, that p is already the answer.
        const double p = deductible_root(loss, delta, cert.a, cert.c, tol);
        const double g = g_value(p, problem.W0, problem.rho, u, w, loss, tol);
        const double g_band = 1e-9 * (1.0 + u.deriv(problem.W_Delta));
        take_deductible = g >= -g_band;
        sol.boundary = std::fabs(g) <= g_band;
        if (take_deductible) {
            sol.contract = Contract::deductible(p);
            sol.lambda_star =
                u.deriv(problem.W_Delta - loss.quantile(p)) * f_value(w, p);
            sol.residual.premium_residual =
                premium_gap(problem, loss, sol.contract, tol);
            return sol;
        }
    } else if (u.ara_class() == UtilitySpec::AraClass::StrictlyDecreasingARA) {
        take_deductible = delta >= sol.landmarks.Delta_bar;
        ded_lo = sol.landmarks.l_Delta_c;
        sol.boundary = std::fabs(delta - sol.landmarks.Delta_tilde) <= band ||
                       std::fabs(delta - sol.landmarks.Delta_bar) <= band;
    } else {
        // Constant or unclassified ARA: single threshold at the problem's own
        // wealth, K_Delta = retained volume of the deductible at l_Delta.
        take_deductible = delta >= sol.landmarks.K_Delta - band;
        sol.boundary = std::fabs(delta - sol.landmarks.K_Delta) <= band;
    }

    if (take_deductible) {
        const double q = deductible_root(loss, delta, ded_lo, 1.0, tol);
        sol.contract = Contract::deductible(q);
        sol.lambda_star =
            u.deriv(problem.W_Delta - loss.quantile(q)) * f_value(w, q);
        sol.residual.premium_residual =
            premium_gap(problem, loss, sol.contract, tol);
    } else {
        sol.residual = solve_threefold_pair(problem, u, w, loss, delta, tol);
        sol.contract = Contract::threefold(sol.residual.z2, sol.residual.z1);
        const double k =
            loss.quantile(sol.residual.z1) - loss.quantile(sol.residual.z2);
        sol.lambda_star =
            u.deriv(problem.W_Delta - k) * f_value(w, sol.residual.z1);
        sol.residual.premium_residual =
            premium_gap(problem, loss, sol.contract, tol);
    }

    if (sol.residual.premium_residual > 1e-7 * (1.0 + loss.mean))
        throw SolverFailed("solve_rdu: premium residual " +
                           std::to_string(sol.residual.premium_residual) +
                           " after the regime solve");
    return sol;
}

Contract solve_rdu(const ProblemSpec& problem, const UtilitySpec& u,
                   const WeightingSpec& w, const LossModel& loss,
                   const Tolerance& tol) {
    return solve_rdu_detailed(problem, u, w, loss, tol).contract;
}

}  // namespace indemnity
