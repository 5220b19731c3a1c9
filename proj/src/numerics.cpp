#include "indemnity/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

namespace indemnity {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1]
// (the classic QUADPACK pair). Nodes are symmetric; only the
// non-negative half is stored.
constexpr double kNodes[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr double kWeights[8] = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
// Gauss weights attach to nodes 1, 3, 5, 7 of the Kronrod set.
constexpr double gWeights[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

struct PanelResult {
    double integral;
    double error;
};

PanelResult gauss_kronrod(const Fn& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);

    // Integrands defined on an open interval may throw OutOfDomain when deep
    // subdivision rounds a node onto a singular endpoint; treat that sample
    // exactly like a non-finite value so the endpoint rescue can take over.
    auto sample = [&](double x) -> double {
        try {
            return f(x);
        } catch (const OutOfDomain&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    double fv[15];
    fv[7] = sample(center);
    for (int i = 0; i < 7; ++i) {
        fv[i] = sample(center - half * kNodes[i]);
        fv[14 - i] = sample(center + half * kNodes[i]);
    }
    for (double v : fv)
        if (!std::isfinite(v)) {
            // A sample blew up (typically an endpoint node rounding onto a
            // singular point). Report infinite error so the adaptive driver
            // isolates the panel instead of poisoning its running totals.
            return {0.0, std::numeric_limits<double>::infinity()};
        }

    double resk = kWeights[7] * fv[7];
    double resg = gWeights[3] * fv[7];
    double resabs = kWeights[7] * std::fabs(fv[7]);
    for (int i = 0; i < 7; ++i) {
        const double sum = fv[i] + fv[14 - i];
        resk += kWeights[i] * sum;
        resabs += kWeights[i] * (std::fabs(fv[i]) + std::fabs(fv[14 - i]));
        if (i % 2 == 1) resg += gWeights[i / 2] * sum;
    }

    const double mean = 0.5 * resk;
    double resasc = kWeights[7] * std::fabs(fv[7] - mean);
    for (int i = 0; i < 7; ++i)
        resasc += kWeights[i] *
                  (std::fabs(fv[i] - mean) + std::fabs(fv[14 - i] - mean));
    resasc *= half;

    const double integral = resk * half;
    double err = std::fabs(resk - resg) * half;
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double round = 50.0 * std::numeric_limits<double>::epsilon() * resabs * half;
    return {integral, std::max(err, round)};
}

struct Panel {
    double lo, hi;
    PanelResult r;
    bool operator<(const Panel& other) const { return r.error < other.r.error; }
};

// One adaptive pass. Returns true on convergence; on failure reports which
// endpoints the worst panels were hugging so the caller can substitute.
bool adapt(const Fn& f, double lo, double hi, const Tolerance& tol,
           double* out, bool* stuck_lo, bool* stuck_hi) {
    std::priority_queue<Panel> heap;
    const double mid = 0.5 * (lo + hi);
    double total = 0.0, total_err = 0.0;
    // Panels whose samples were non-finite carry error = +inf; count them
    // separately so `total` and `total_err` stay finite and meaningful.
    int bad = 0;
    auto push = [&](Panel p) {
        if (std::isinf(p.r.error)) ++bad; else total_err += p.r.error;
        total += p.r.integral;
        heap.push(p);
    };
    auto drop = [&](const Panel& p) {
        if (std::isinf(p.r.error)) --bad; else total_err -= p.r.error;
        total -= p.r.integral;
    };
    auto flag_endpoints = [&](const Panel& w) {
        if (w.lo <= lo + (hi - lo) * 1e-12) *stuck_lo = true;
        if (w.hi >= hi - (hi - lo) * 1e-12) *stuck_hi = true;
    };
    // Seed with two panels so singularities at both endpoints get their own
    // subdivision lineage from the start.
    push({lo, mid, gauss_kronrod(f, lo, mid)});
    push({mid, hi, gauss_kronrod(f, mid, hi)});

    int splits = 0;
    while (bad > 0 ||
           total_err > std::max(tol.abs_tol, tol.rel_tol * std::fabs(total))) {
        if (splits++ >= tol.max_iter) {
            *stuck_lo = *stuck_hi = false;
            // Inspect the worst offenders for endpoint contact.
            for (int i = 0; i < 4 && !heap.empty(); ++i) {
                flag_endpoints(heap.top());
                heap.pop();
            }
            *out = total;
            return false;
        }
        Panel worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.lo + worst.hi);
        if (m <= worst.lo || m >= worst.hi) {
            if (std::isinf(worst.r.error)) {
                // Non-finite samples at floating-point resolution: further
                // splitting cannot help, so hand the endpoint diagnosis to
                // the caller for a substitution rescue.
                *stuck_lo = *stuck_hi = false;
                flag_endpoints(worst);
                for (int i = 0; i < 3 && !heap.empty(); ++i) {
                    flag_endpoints(heap.top());
                    heap.pop();
                }
                *out = total;
                return false;
            }
            // Panel at floating-point resolution; its error is what it is.
            // Park it by zeroing the error so the loop can look elsewhere.
            total_err -= worst.r.error;
            worst.r.error = 0.0;
            heap.push(worst);
            continue;
        }
        drop(worst);
        push({worst.lo, m, gauss_kronrod(f, worst.lo, m)});
        push({m, worst.hi, gauss_kronrod(f, m, worst.hi)});
    }
    *out = total;
    return true;
}

double integrate_impl(const Fn& f, double lo, double hi, const Tolerance& tol,
                      int depth) {
    double value = 0.0;
    bool stuck_lo = false, stuck_hi = false;
    if (adapt(f, lo, hi, tol, &value, &stuck_lo, &stuck_hi)) return value;
    if (depth >= 2 || (!stuck_lo && !stuck_hi))
        throw NonConvergent("integrate: error estimate not met after " +
                            std::to_string(tol.max_iter) + " subdivisions on [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");

    // Fold the offending endpoint(s) through t = endpoint -/+ s^2, which
    // multiplies the integrand by 2s and lifts power-law blow-ups by one
    // power of s^2 per application.
    const double mid = 0.5 * (lo + hi);
    double left, right;
    if (stuck_lo) {
        const double w = std::sqrt(mid - lo);
        left = integrate_impl(
            [&](double s) { return 2.0 * s * f(lo + s * s); }, 0.0, w, tol,
            depth + 1);
    } else {
        left = integrate_impl(f, lo, mid, tol, depth + 1);
    }
    if (stuck_hi) {
        const double w = std::sqrt(hi - mid);
        right = integrate_impl(
            [&](double s) { return 2.0 * s * f(hi - s * s); }, 0.0, w, tol,
            depth + 1);
    } else {
        right = integrate_impl(f, mid, hi, tol, depth + 1);
    }
    return left + right;
}

}  // namespace

Bracket make_bracket(const Fn& f, double lo, double hi) {
    Bracket b{lo, hi, f(lo), f(hi)};
    if (b.f_lo * b.f_hi > 0.0)
        throw NoSignChange("make_bracket: f(" + std::to_string(lo) + ")=" +
                           std::to_string(b.f_lo) + " and f(" +
                           std::to_string(hi) + ")=" + std::to_string(b.f_hi) +
                           " have the same sign");
    return b;
}

double integrate(const Fn& f, double lo, double hi, const Tolerance& tol) {
    if (lo > hi)
        throw InvalidInterval("integrate: lo=" + std::to_string(lo) + " > hi=" +
                              std::to_string(hi));
    if (lo == hi) return 0.0;
    return integrate_impl(f, lo, hi, tol, 0);
}

double find_root(const Fn& f, const Bracket& bracket, const Tolerance& tol) {
    if (bracket.lo >= bracket.hi)
        throw InvalidInterval("find_root: bracket [" + std::to_string(bracket.lo) +
                              ", " + std::to_string(bracket.hi) + "] is empty");
    if (bracket.f_lo * bracket.f_hi > 0.0)
        throw NoSignChange("find_root: bracket endpoints have the same sign");

    // Brent's method: a and b straddle the root, b is the best iterate,
    // c is the previous b.
    double a = bracket.lo, b = bracket.hi;
    double fa = bracket.f_lo, fb = bracket.f_hi;
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (std::fabs(fa) < std::fabs(fb)) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double c = a, fc = fa;
    double d = b - a, e = d;

    for (int iter = 0; iter < tol.max_iter; ++iter) {
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double xtol = 0.5 * (tol.abs_tol + tol.rel_tol * std::fabs(b));
        const double m = 0.5 * (c - b);
        // Position-based stop only: a small residual says nothing about the
        // root's location when the function is nearly flat there.
        if (std::fabs(m) <= xtol) return b;

        if (std::fabs(e) < xtol || std::fabs(fa) <= std::fabs(fb)) {
            d = e = m;  // forced bisection
        } else {
            double p, q;
            const double s = fb / fa;
            if (a == c) {  // secant
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {  // inverse quadratic interpolation
                const double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::fabs(xtol * q),
                                   std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = e = m;
            }
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > xtol) ? d : (m > 0.0 ? xtol : -xtol);
        fb = f(b);
        if (fb == 0.0) return b;
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
    }
    throw NonConvergent("find_root: no convergence in " +
                        std::to_string(tol.max_iter) + " iterations");
}

double invert_monotone(const Fn& f, double target, double lo, double hi,
                       const Tolerance& tol) {
    auto g = [&](double x) { return f(x) - target; };
    return find_root(g, make_bracket(g, lo, hi), tol);
}

double minimize_unimodal(const Fn& f, double lo, double hi, const Tolerance& tol) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int iter = 0; iter < tol.max_iter &&
                       (b - a) > tol.abs_tol + tol.rel_tol * std::fabs(a);
         ++iter) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace indemnity
