#pragma once

#include <functional>

#include "indemnity/errors.hpp"

namespace indemnity {

struct Tolerance {
    double abs_tol = 1e-10;
    double rel_tol = 1e-9;
    int max_iter = 200;
};

// A sign-changing interval for find_root. f_lo/f_hi are the endpoint values,
// so callers that already evaluated f do not pay for two more evaluations.
struct Bracket {
    double lo;
    double hi;
    double f_lo;
    double f_hi;
};

using Fn = std::function<double(double)>;

// Evaluates f at both ends and throws NoSignChange unless f_lo * f_hi <= 0.
Bracket make_bracket(const Fn& f, double lo, double hi);

// Adaptive Gauss-Kronrod quadrature of f over [lo, hi].
//
// Integrable endpoint singularities are fine: when subdivision stalls against
// an endpoint, that tail is re-integrated under the substitution t = lo + s^2
// (resp. t = hi - s^2), which tames any singularity milder than 1/t; the
// substitution nests once more for the harder power-law blow-ups that the
// steeper weighting distortions produce near 0 and 1.
//
// Throws InvalidInterval if lo > hi, NonConvergent if the error estimate is
// still above max(abs_tol, rel_tol*|result|) after tol.max_iter subdivisions
// and the substitutions are exhausted.
double integrate(const Fn& f, double lo, double hi, const Tolerance& tol = {});

// Brent-style bracketed root finding: bisection-safeguarded secant / inverse
// quadratic steps. Returns x* inside the bracket with |f(x*)| <= abs_tol or
// bracket width <= abs_tol + rel_tol*|x*|. Throws NoSignChange if the bracket
// is not sign-changing, NonConvergent past tol.max_iter iterations.
double find_root(const Fn& f, const Bracket& bracket, const Tolerance& tol = {});

// Convenience: solve f(x) = target for strictly monotone f on [lo, hi].
double invert_monotone(const Fn& f, double target, double lo, double hi,
                       const Tolerance& tol = {});

// Golden-section minimizer for unimodal f on [lo, hi]; used for landmark
// scans. Returns the abscissa of the minimum to abs_tol+rel_tol*|x| width.
double minimize_unimodal(const Fn& f, double lo, double hi, const Tolerance& tol = {});

}  // namespace indemnity
