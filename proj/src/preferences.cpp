#include "indemnity/preferences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "indemnity/landmarks.hpp"
#include "indemnity/loss_model.hpp"

namespace indemnity {

namespace {

// Tversky-Kahneman closed forms via the log-derivative:
//   ln T = theta ln x - (1/theta) ln D,  D = x^theta + (1-x)^theta,
// so T' = T * L' and T'' = T * (L'' + L'^2) with
//   L'  = theta/x - S/D,            S = x^(theta-1) - (1-x)^(theta-1),
//   L'' = -theta/x^2 - (S'D - theta S^2)/D^2,
//   S'  = (theta-1) (x^(theta-2) + (1-x)^(theta-2)).
double tk_value(double theta, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double A = std::pow(x, theta), B = std::pow(1.0 - x, theta);
    return A / std::pow(A + B, 1.0 / theta);
}

double tk_deriv(double theta, double x) {
    const double A = std::pow(x, theta), B = std::pow(1.0 - x, theta);
    const double D = A + B;
    const double S = std::pow(x, theta - 1.0) - std::pow(1.0 - x, theta - 1.0);
    const double L1 = theta / x - S / D;
    return tk_value(theta, x) * L1;
}

double tk_second(double theta, double x) {
    const double A = std::pow(x, theta), B = std::pow(1.0 - x, theta);
    const double D = A + B;
    const double S = std::pow(x, theta - 1.0) - std::pow(1.0 - x, theta - 1.0);
    const double Sp =
        (theta - 1.0) * (std::pow(x, theta - 2.0) + std::pow(1.0 - x, theta - 2.0));
    const double L1 = theta / x - S / D;
    const double L2 = -theta / (x * x) - (Sp * D - theta * S * S) / (D * D);
    return tk_value(theta, x) * (L2 + L1 * L1);
}

}  // namespace

WeightingSpec WeightingSpec::tversky_kahneman(double theta) {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw InvalidParameter("weighting: theta must lie in (0,1), got " +
                               std::to_string(theta));
    WeightingSpec w;
    w.family_ = Family::TverskyKahneman;
    w.theta_ = theta;
    w.cache_ = std::make_shared<detail::LandmarkCache>();
    return w;
}

WeightingSpec WeightingSpec::user_defined(Fn T, Fn T1, Fn T2) {
    if (!T || !T1 || !T2)
        throw InvalidParameter("weighting: user-defined spec needs T, T', T''");
    WeightingSpec w;
    w.family_ = Family::UserDefined;
    w.t0_ = std::move(T);
    w.t1_ = std::move(T1);
    w.t2_ = std::move(T2);
    w.cache_ = std::make_shared<detail::LandmarkCache>();
    return w;
}

double WeightingSpec::value(double z) const {
    if (z < 0.0 || z > 1.0)
        throw OutOfDomain("weighting: T evaluated at z=" + std::to_string(z));
    return family_ == Family::TverskyKahneman ? tk_value(theta_, z) : t0_(z);
}

double WeightingSpec::deriv(double z) const {
    if (z <= 0.0 || z >= 1.0)
        throw OutOfDomain("weighting: T' evaluated at z=" + std::to_string(z) +
                          " outside (0,1)");
    return family_ == Family::TverskyKahneman ? tk_deriv(theta_, z) : t1_(z);
}

double WeightingSpec::second(double z) const {
    if (z <= 0.0 || z >= 1.0)
        throw OutOfDomain("weighting: T'' evaluated at z=" + std::to_string(z) +
                          " outside (0,1)");
    return family_ == Family::TverskyKahneman ? tk_second(theta_, z) : t2_(z);
}

double eval_weighting(const WeightingSpec& w, double z, int order) {
    switch (order) {
        case 0: return w.value(z);
        case 1: return w.deriv(z);
        case 2: return w.second(z);
        default:
            throw InvalidParameter("eval_weighting: order must be 0, 1 or 2");
    }
}

UtilitySpec UtilitySpec::identity() {
    UtilitySpec u;
    u.family_ = Family::Identity;
    u.ara_class_ = AraClass::Identity;
    return u;
}

UtilitySpec UtilitySpec::exponential(double alpha) {
    if (!(alpha > 0.0))
        throw InvalidParameter("utility: exponential alpha must be > 0");
    UtilitySpec u;
    u.family_ = Family::Exponential;
    u.ara_class_ = AraClass::ConstantARA;
    u.param_ = alpha;
    return u;
}

UtilitySpec UtilitySpec::power(double gamma) {
    if (!(gamma > 0.0) || !(gamma < 1.0))
        throw InvalidParameter("utility: power gamma must lie in (0,1)");
    UtilitySpec u;
    u.family_ = Family::Power;
    u.ara_class_ = AraClass::StrictlyDecreasingARA;
    u.param_ = gamma;
    return u;
}

UtilitySpec UtilitySpec::log_utility() {
    UtilitySpec u;
    u.family_ = Family::Log;
    u.ara_class_ = AraClass::StrictlyDecreasingARA;
    return u;
}

UtilitySpec UtilitySpec::user_defined(Fn u0, Fn u1, Fn u2, AraClass cls) {
    if (!u0 || !u1 || !u2)
        throw InvalidParameter("utility: user-defined spec needs u, u', u''");
    UtilitySpec u;
    u.family_ = Family::UserDefined;
    u.ara_class_ = cls;
    u.u0_ = std::move(u0);
    u.u1_ = std::move(u1);
    u.u2_ = std::move(u2);
    return u;
}

bool UtilitySpec::requires_positive_wealth() const {
    return family_ == Family::Power || family_ == Family::Log;
}

double UtilitySpec::value(double z) const {
    switch (family_) {
        case Family::Identity: return z;
        case Family::Exponential: return 1.0 - std::exp(-param_ * z);
        case Family::Power:
            if (z < 0.0) throw OutOfDomain("utility: z^gamma needs z >= 0");
            return std::pow(z, param_);
        case Family::Log:
            if (z <= 0.0) throw OutOfDomain("utility: ln z needs z > 0");
            return std::log(z);
        case Family::UserDefined: return u0_(z);
    }
    return 0.0;  // unreachable
}

double UtilitySpec::deriv(double z) const {
    switch (family_) {
        case Family::Identity: return 1.0;
        case Family::Exponential: return param_ * std::exp(-param_ * z);
        case Family::Power:
            if (z <= 0.0) throw OutOfDomain("utility: (z^gamma)' needs z > 0");
            return param_ * std::pow(z, param_ - 1.0);
        case Family::Log:
            if (z <= 0.0) throw OutOfDomain("utility: (ln z)' needs z > 0");
            return 1.0 / z;
        case Family::UserDefined: return u1_(z);
    }
    return 0.0;
}

double UtilitySpec::second(double z) const {
    switch (family_) {
        case Family::Identity: return 0.0;
        case Family::Exponential: return -param_ * param_ * std::exp(-param_ * z);
        case Family::Power:
            if (z <= 0.0) throw OutOfDomain("utility: (z^gamma)'' needs z > 0");
            return param_ * (param_ - 1.0) * std::pow(z, param_ - 2.0);
        case Family::Log:
            if (z <= 0.0) throw OutOfDomain("utility: (ln z)'' needs z > 0");
            return -1.0 / (z * z);
        case Family::UserDefined: return u2_(z);
    }
    return 0.0;
}

double UtilitySpec::inverse(double v) const {
    switch (family_) {
        case Family::Identity: return v;
        case Family::Exponential:
            if (v >= 1.0) throw OutOfDomain("utility: exp inverse needs v < 1");
            return -std::log(1.0 - v) / param_;
        case Family::Power:
            if (v < 0.0) throw OutOfDomain("utility: power inverse needs v >= 0");
            return std::pow(v, 1.0 / param_);
        case Family::Log: return std::exp(v);
        case Family::UserDefined:
            throw OutOfDomain("utility: no inverse supplied for user-defined u");
    }
    return 0.0;
}

double arrow_pratt(const UtilitySpec& u, double z) {
    const double d = u.deriv(z);
    if (d == 0.0)
        throw OutOfDomain("arrow_pratt: u'(z)=0 at z=" + std::to_string(z));
    return -u.second(z) / d;
}

double arrow_pratt_T(const WeightingSpec& w, double z) {
    const double d = w.deriv(z);
    if (d == 0.0)
        throw OutOfDomain("arrow_pratt_T: T'(z)=0 at z=" + std::to_string(z));
    return -w.second(z) / d;
}

ARAReport make_ara_report(const UtilitySpec& u, double lo, double hi, int n) {
    if (n < 2 || !(lo < hi))
        throw InvalidParameter("make_ara_report: need n >= 2 and lo < hi");
    ARAReport r;
    r.classification = u.ara_class();
    r.monotone_decreasing = true;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = lo + (hi - lo) * (i + 0.5) / n;
        const double a = arrow_pratt(u, z);
        if (i > 0 && a > prev + 1e-12 * (1.0 + std::fabs(prev)))
            r.monotone_decreasing = false;
        r.a_u_samples.emplace_back(z, a);
        prev = a;
    }
    return r;
}

bool ValidationReport::all_pass() const {
    for (const auto& c : clauses)
        if (!c.pass) return false;
    return true;
}

ValidationReport validate_weighting(const WeightingSpec& w, int grid_size) {
    if (grid_size < 100)
        throw InvalidParameter("validate_weighting: grid_size must be >= 100");
    ValidationReport rep;
    const int n = grid_size;

    bool monotone = true;
    double worst_gap = 1.0;
    double prev = w.value(0.0);
    for (int i = 1; i <= n; ++i) {
        const double cur = w.value(static_cast<double>(i) / n);
        worst_gap = std::min(worst_gap, cur - prev);
        if (cur <= prev) monotone = false;
        prev = cur;
    }
    rep.clauses.push_back({"T strictly increasing on [0,1]", monotone,
                           "smallest grid increment " + std::to_string(worst_gap)});

    // T' should fall to a unique interior minimum and rise after it.
    int flips = 0;
    int last_sign = 0;
    double dprev = w.deriv(1.0 / n);
    for (int i = 2; i < n; ++i) {
        const double d = w.deriv(static_cast<double>(i) / n);
        const int s = d > dprev ? 1 : (d < dprev ? -1 : 0);
        if (s != 0 && last_sign != 0 && s != last_sign) ++flips;
        if (s != 0) last_sign = s;
        dprev = d;
    }
    const bool inverse_s = flips == 1 && last_sign == 1;
    rep.clauses.push_back({"T' has a unique interior minimum", inverse_s,
                           "direction flips on grid: " + std::to_string(flips)});

    const double d0 = w.deriv(1.0 / n);
    rep.clauses.push_back({"T'(0+) > 1", d0 > 1.0,
                           "T'(1/" + std::to_string(n) + ") = " + std::to_string(d0)});

    const double dn1 = w.deriv(1.0 - 1.0 / n);
    const double dn10 = w.deriv(1.0 - 10.0 / n);
    rep.clauses.push_back({"T' grows without bound near 1", dn1 > dn10,
                           "T'(1-1/n) = " + std::to_string(dn1) + " vs T'(1-10/n) = " +
                               std::to_string(dn10)});
    return rep;
}

ValidationReport validate_utility(const UtilitySpec& u, double lo, double hi,
                                  int grid_size) {
    if (grid_size < 2 || !(lo < hi))
        throw InvalidParameter("validate_utility: need grid_size >= 2 and lo < hi");
    ValidationReport rep;
    bool increasing = true, concave = true;
    double min_slope = std::numeric_limits<double>::infinity();
    double max_curv = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid_size; ++i) {
        const double z = lo + (hi - lo) * i / grid_size;
        const double d1 = u.deriv(z), d2 = u.second(z);
        min_slope = std::min(min_slope, d1);
        max_curv = std::max(max_curv, d2);
        if (!(d1 > 0.0)) increasing = false;
        if (d2 > 0.0) concave = false;
    }
    rep.clauses.push_back({"u' > 0", increasing,
                           "minimum slope " + std::to_string(min_slope)});
    rep.clauses.push_back({"u'' <= 0", concave,
                           "maximum curvature " + std::to_string(max_curv)});
    return rep;
}

ValidationReport validate_weighting_dominance(const UtilitySpec& u,
                                              const WeightingSpec& w,
                                              const LossModel& loss, double W,
                                              double a, int grid_size) {
    if (grid_size < 10 || !(a > 0.0) || !(a < 1.0))
        throw InvalidParameter(
            "validate_weighting_dominance: need grid_size >= 10 and a in (0,1)");
    ValidationReport rep;

    // An atom at zero covering (0, a] makes the inequality automatic: the
    // quantile is flat there, so the right-hand side vanishes. Report that
    // route on its own and skip the grid scan.
    if (loss.atom0 >= a) {
        rep.clauses.push_back(
            {"A_T(z) > A_u(W - F^-1(z)) (F^-1)'(z) on (0,a]", true,
             "holds automatically: P(X=0) = " + std::to_string(loss.atom0) +
                 " >= a = " + std::to_string(a) +
                 ", so (F^-1)' = 0 on the whole region"});
        return rep;
    }

    bool dominant = true;
    double min_margin = std::numeric_limits<double>::infinity();
    std::string note;
    for (int i = 1; i <= grid_size; ++i) {
        const double z = a * i / grid_size;
        const double slope = loss.quantile_deriv(z);
        if (slope == 0.0) continue;  // atom region contributes nothing
        const double wealth = W - loss.quantile(z);
        double margin;
        try {
            margin = arrow_pratt_T(w, z) - arrow_pratt(u, wealth) * slope;
        } catch (const OutOfDomain& e) {
            dominant = false;
            note = e.what();
            break;
        }
        min_margin = std::min(min_margin, margin);
        if (!(margin > 0.0)) dominant = false;
    }
    rep.clauses.push_back(
        {"A_T(z) > A_u(W - F^-1(z)) (F^-1)'(z) on (0,a]", dominant,
         note.empty() ? "minimum margin " + std::to_string(min_margin) : note});
    return rep;
}

}  // namespace indemnity
