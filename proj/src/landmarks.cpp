#include "indemnity/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace indemnity {

namespace {

// Smallest abscissa at which T' is still representable; the inverse-S
// families blow up polynomially at both ends, which doubles handle fine.
constexpr double kEdge = 1e-10;

LandmarkCertificate compute_impl(const WeightingSpec& w, const Tolerance& tol) {
    LandmarkCertificate cert;

    // b: minimize T' by golden section, then polish as the root of T''.
    // A coarse scan brackets the minimum first so multimodal garbage from an
    // invalid spec is caught rather than silently accepted.
    const int scan_n = 200;
    int min_i = 1;
    double min_v = std::numeric_limits<double>::infinity();
    for (int i = 1; i < scan_n; ++i) {
        const double v = w.deriv(static_cast<double>(i) / scan_n);
        if (v < min_v) {
            min_v = v;
            min_i = i;
        }
    }
    if (min_i <= 1 || min_i >= scan_n - 1)
        throw LandmarkNotFound(
            "landmarks: T' attains its scan minimum at the boundary; "
            "no interior b exists");
    const double lo_b = static_cast<double>(min_i - 1) / scan_n;
    const double hi_b = static_cast<double>(min_i + 1) / scan_n;
    cert.b = minimize_unimodal([&](double z) { return w.deriv(z); }, lo_b, hi_b,
                               tol);
    // Polish with the curvature root when it brackets (it does for the
    // built-in family; a user-defined T'' may be too noisy, in which case the
    // golden-section value stands).
    try {
        auto t2 = [&](double z) { return w.second(z); };
        cert.b = find_root(t2, make_bracket(t2, lo_b, hi_b), tol);
    } catch (const NoSignChange&) {
    }

    // a: root of p(z) = (1-T(z)) - T'(z)(1-z) on (0, b). p rises from
    // -infinity (T'(0+) > 1 at the very least) and is positive at b.
    auto p = [&](double z) { return (1.0 - w.value(z)) - w.deriv(z) * (1.0 - z); };
    {
        double lo = kEdge;
        if (p(lo) >= 0.0)
            throw LandmarkNotFound("landmarks: p(z) not negative near 0; "
                                   "T'(0+) > 1 seems to fail");
        double hi = cert.b;
        if (p(hi) <= 0.0) {
            // Defensive: walk right of b (p may cross just past the scan cell).
            hi = std::min(1.0 - kEdge, cert.b * 1.5);
            if (p(hi) <= 0.0)
                throw LandmarkNotFound(
                    "landmarks: no sign change for the f-minimum point a in (0,b)");
        }
        cert.a = find_root(p, make_bracket(p, lo, hi), tol);
    }

    // c: fixed point of T on (a, 1]. T sits above the diagonal on (0,c) and
    // below it on (c,1); no interior crossing means c = 1.
    auto fix = [&](double z) { return w.value(z) - z; };
    {
        const double lo = cert.a;
        const double hi = 1.0 - 1e-8;
        if (fix(lo) <= 0.0)
            throw LandmarkNotFound(
                "landmarks: T(a) <= a; weighting is not inverse-S shaped");
        cert.c = fix(hi) >= 0.0 ? 1.0
                                : find_root(fix, make_bracket(fix, lo, hi), tol);
    }

    cert.lambda_hat = f_value(w, cert.a);

    // Re-verify the roots by sign checks on both sides (bracket-drift guard).
    const double eps = 1e-6;
    if (!(p(std::max(kEdge, cert.a - eps)) < 0.0) || !(p(cert.a + eps) > 0.0))
        throw LandmarkNotFound("landmarks: a failed the two-sided sign re-check");
    if (cert.c < 1.0 &&
        (!(fix(cert.c - eps) > 0.0) || !(fix(std::min(1.0 - kEdge, cert.c + eps)) < 0.0)))
        throw LandmarkNotFound("landmarks: c failed the two-sided sign re-check");
    if (!(cert.lambda_hat < 1.0))
        throw LandmarkNotFound("landmarks: f(a) >= 1; f has no interior minimum");
    if (!(cert.a < cert.b) || !(cert.a < cert.c))
        throw LandmarkNotFound("landmarks: ordering a < b, a < c violated");
    return cert;
}

}  // namespace

double f_value(const WeightingSpec& w, double z) {
    if (z < 0.0 || z >= 1.0)
        throw OutOfDomain("f_value: z=" + std::to_string(z) +
                          " outside [0,1); f diverges at 1");
    return (1.0 - w.value(z)) / (1.0 - z);
}

LandmarkCertificate compute_landmarks(const WeightingSpec& w,
                                      const Tolerance& tol) {
    auto cache = w.cache();
    if (!cache) return compute_impl(w, tol);  // spec built without a cache slot
    std::call_once(cache->once, [&] { cache->cert = compute_impl(w, tol); });
    return *cache->cert;
}

double k_of(double threshold, const LossModel& loss, const Tolerance& tol) {
    if (threshold < 0.0 || threshold > 1.0)
        throw OutOfDomain("k_of: threshold outside [0,1]");
    if (threshold == 0.0) return loss.quantile(0.0);  // 0 unless degenerate
    const double head =
        integrate([&](double z) { return loss.quantile(z); }, 0.0, threshold, tol);
    return head + loss.quantile(threshold) * (1.0 - threshold);
}

double delta_of_d(double d, const LossModel& loss, const Tolerance& tol) {
    return k_of(d, loss, tol);
}

namespace detail {

// int_lo^hi u'(wealth - G(t)) T'(t) dt with flat stretches of G integrated
// exactly through increments of T; slope stretches go to quadrature.
double weighted_marginal_integral(double wealth, const UtilitySpec& u,
                                  const WeightingSpec& w,
                                  const QuantileSolution& G, double lo, double hi,
                                  const Tolerance& tol) {
    // Breakpoints of G inside (lo, hi).
    std::vector<double> pts{lo, hi};
    const Contract& c = G.contract;
    auto add = [&](double z) {
        if (z > lo && z < hi) pts.push_back(z);
    };
    switch (c.shape) {
        case Contract::Shape::Deductible: add(c.q); break;
        case Contract::Shape::Threefold:
            add(c.lower);
            add(c.upper);
            break;
        default: break;
    }
    add(G.loss->atom0);
    std::sort(pts.begin(), pts.end());

    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double p = pts[i], q = pts[i + 1];
        if (q - p < 1e-15) continue;
        const double mid = 0.5 * (p + q);
        if (G.derivative(mid) == 0.0) {
            // G constant on (p,q): integrate u'(const) T' exactly.
            total += u.deriv(wealth - G.value(mid)) * (w.value(q) - w.value(p));
        } else {
            total += integrate(
                [&](double t) { return u.deriv(wealth - G.value(t)) * w.deriv(t); },
                p, q, tol);
        }
    }
    return total;
}

double h_at_wealth(double wealth, const UtilitySpec& u, const WeightingSpec& w,
                   const LossModel& loss, double z, const Tolerance& tol) {
    if (z <= 0.0 || z >= 1.0)
        throw OutOfDomain("h: z must lie in (0,1)");
    const double lead = z * u.deriv(wealth - loss.quantile(z)) * f_value(w, z);
    QuantileSolution retained_all{Contract::no_coverage(), &loss};
    const double tail =
        weighted_marginal_integral(wealth, u, w, retained_all, 0.0, z, tol);
    return lead - tail;
}

double find_l_at_wealth(double wealth, const UtilitySpec& u,
                        const WeightingSpec& w, const LossModel& loss,
                        const LandmarkCertificate& cert, const Tolerance& tol) {
    auto h = [&](double z) { return h_at_wealth(wealth, u, w, loss, z, tol); };
    const double lo = cert.a;
    double hi = std::min(cert.c, 1.0 - 1e-7);
    double f_lo = h(lo);
    double f_hi = h(hi);
    // When c = 1 the upper endpoint must be pushed toward 1 until the sign
    // turns; f (and hence h) diverges there, so a few steps suffice. With an
    // interior c the sign conditions are part of the contract, so a negative
    // h(c) must surface as BracketInvalid instead of a silent extension.
    const bool c_at_one = cert.c >= 1.0 - 1e-7;
    for (int step = 0; c_at_one && f_hi <= 0.0 && hi < 1.0 - 1e-12 && step < 6;
         ++step) {
        hi = 0.5 * (hi + 1.0);
        f_hi = h(hi);
    }
    // A root exactly on the bracket boundary appears as a wrong-signed value
    // of quadrature-noise size (an atom covering [0,c] forces h(c) = 0, for
    // instance); accept the endpoint rather than demanding a sign change.
    const double edge = 1e-6 * (1.0 + std::fabs(f_lo) + std::fabs(f_hi));
    if (!(f_hi > 0.0) && std::fabs(f_hi) <= edge) return hi;
    if (!(f_lo < 0.0) && std::fabs(f_lo) <= edge) return lo;
    if (!(f_lo < 0.0) || !(f_hi > 0.0))
        throw BracketInvalid(
            "find_l_delta: expected h(a) < 0 < h(c); got h(" + std::to_string(lo) +
            ")=" + std::to_string(f_lo) + ", h(" + std::to_string(hi) + ")=" +
            std::to_string(f_hi) + " (assumption violation upstream)");
    return find_root(h, Bracket{lo, hi, f_lo, f_hi}, tol);
}

}  // namespace detail

double n_lambda(const ProblemSpec& problem, const UtilitySpec& u,
                const WeightingSpec& w, const QuantileSolution& G, double lambda,
                double z, const Tolerance& tol) {
    if (z < 0.0 || z > 1.0) throw OutOfDomain("n_lambda: z outside [0,1]");
    if (z == 1.0) return 0.0;
    if (u.family() == UtilitySpec::Family::Identity)
        return lambda * (1.0 - z) - (1.0 - w.value(z));
    const double tail = detail::weighted_marginal_integral(
        problem.W_Delta, u, w, G, z, 1.0, tol);
    return lambda * (1.0 - z) - tail;
}

double h_delta(const ProblemSpec& problem, const UtilitySpec& u,
               const WeightingSpec& w, const LossModel& loss, double z,
               const Tolerance& tol) {
    return detail::h_at_wealth(problem.W_Delta, u, w, loss, z, tol);
}

double find_l_delta(const ProblemSpec& problem, const UtilitySpec& u,
                    const WeightingSpec& w, const LossModel& loss,
                    const Tolerance& tol) {
    const LandmarkCertificate cert = compute_landmarks(w, tol);
    return detail::find_l_at_wealth(problem.W_Delta, u, w, loss, cert, tol);
}

double g_value(double p, double W0, double rho, const UtilitySpec& u,
               const WeightingSpec& w, const LossModel& loss,
               const Tolerance& tol) {
    const double delta_p = delta_of_d(p, loss, tol);
    const double wealth = W0 - (1.0 + rho) * (loss.mean - delta_p);
    return detail::h_at_wealth(wealth, u, w, loss, p, tol);
}

RduLandmarks compute_rdu_landmarks(const ProblemSpec& problem,
                                   const UtilitySpec& u, const WeightingSpec& w,
                                   const LossModel& loss, const Tolerance& tol) {
    const LandmarkCertificate cert = compute_landmarks(w, tol);
    RduLandmarks r;
    r.l_Delta =
        detail::find_l_at_wealth(problem.W_Delta, u, w, loss, cert, tol);
    r.K_Delta = delta_of_d(r.l_Delta, loss, tol);
    if (u.ara_class() == UtilitySpec::AraClass::StrictlyDecreasingARA) {
        const double delta_a = delta_of_d(cert.a, loss, tol);
        const double delta_c = delta_of_d(cert.c, loss, tol);
        const double w_a = problem.W0 - (1.0 + problem.rho) * (loss.mean - delta_a);
        const double w_c = problem.W0 - (1.0 + problem.rho) * (loss.mean - delta_c);
        r.l_Delta_a = detail::find_l_at_wealth(w_a, u, w, loss, cert, tol);
        r.l_Delta_c = detail::find_l_at_wealth(w_c, u, w, loss, cert, tol);
        r.Delta_tilde = delta_of_d(r.l_Delta_a, loss, tol);
        r.Delta_bar = delta_of_d(r.l_Delta_c, loss, tol);
    } else {
        r.l_Delta_a = r.l_Delta_c = r.l_Delta;
        r.Delta_tilde = r.Delta_bar = r.K_Delta;
    }
    return r;
}

}  // namespace indemnity
