#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "indemnity/errors.hpp"
#include "indemnity/numerics.hpp"

namespace indemnity {

struct LandmarkCertificate;  // defined in landmarks.hpp
struct LossModel;            // defined in loss_model.hpp

namespace detail {
struct LandmarkCache;  // memoized certificate, shared across copies
}

// Probability weighting function T: [0,1] -> [0,1], distorting decumulative
// probabilities. The built-in family is the Tversky-Kahneman one,
//   T_theta(x) = x^theta / (x^theta + (1-x)^theta)^(1/theta),
// which is inverse-S shaped (concave then convex) for theta below 1.
class WeightingSpec {
public:
    enum class Family { TverskyKahneman, UserDefined };

    // theta must lie in (0,1); values at or below ~0.279 produce a
    // non-monotone T and are rejected later by validate_weighting, not here,
    // so that the validator can report the failure clause-by-clause.
    static WeightingSpec tversky_kahneman(double theta);

    // Caller supplies T and its first two derivatives; no automatic
    // differentiation is attempted.
    static WeightingSpec user_defined(Fn T, Fn T1, Fn T2);

    Family family() const { return family_; }
    double theta() const { return theta_; }

    double value(double z) const;     // T(z),  z in [0,1]
    double deriv(double z) const;     // T'(z), z in (0,1)
    double second(double z) const;    // T''(z), z in (0,1)

    // Landmark memo: computed once by compute_landmarks(), shared by copies.
    const std::shared_ptr<detail::LandmarkCache>& cache() const { return cache_; }

private:
    WeightingSpec() = default;
    Family family_ = Family::TverskyKahneman;
    double theta_ = 0.0;
    Fn t0_, t1_, t2_;
    std::shared_ptr<detail::LandmarkCache> cache_;
};

// Evaluate T (order 0), T' (order 1) or T'' (order 2).
// Derivatives are only defined on the open interval.
double eval_weighting(const WeightingSpec& w, double z, int order);

// Utility function u on wealth. Strictly increasing, concave.
class UtilitySpec {
public:
    enum class Family { Identity, Exponential, Power, Log, UserDefined };
    enum class AraClass { Identity, ConstantARA, StrictlyDecreasingARA, Other };

    static UtilitySpec identity();
    static UtilitySpec exponential(double alpha);  // u(z) = 1 - e^(-alpha z)
    static UtilitySpec power(double gamma);        // u(z) = z^gamma, gamma in (0,1)
    static UtilitySpec log_utility();              // u(z) = ln z
    static UtilitySpec user_defined(Fn u, Fn u1, Fn u2, AraClass cls);

    Family family() const { return family_; }
    AraClass ara_class() const { return ara_class_; }
    double param() const { return param_; }

    // True for families defined only on positive wealth (Power, Log).
    bool requires_positive_wealth() const;

    double value(double z) const;
    double deriv(double z) const;   // u' > 0
    double second(double z) const;  // u'' <= 0

    // Inverse of u, for certainty-equivalent reporting.
    double inverse(double v) const;

private:
    UtilitySpec() = default;
    Family family_ = Family::Identity;
    AraClass ara_class_ = AraClass::Identity;
    double param_ = 0.0;
    Fn u0_, u1_, u2_;
};

// Arrow-Pratt absolute risk aversion A_f(z) = -f''(z)/f'(z).
double arrow_pratt(const UtilitySpec& u, double z);
double arrow_pratt_T(const WeightingSpec& w, double z);

struct ARAReport {
    std::vector<std::pair<double, double>> a_u_samples;  // (z, A_u(z))
    UtilitySpec::AraClass classification;
    bool monotone_decreasing;
};

ARAReport make_ara_report(const UtilitySpec& u, double lo, double hi, int n);

// Clause-by-clause validation outcome. Failures are entries, not exceptions,
// so a CLI can report every broken clause at once.
struct ValidationClause {
    std::string name;
    bool pass;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationClause> clauses;
    bool all_pass() const;
};

// Checks the inverse-S shape requirements on a grid:
// strict monotonicity of T, a unique interior minimum of T', T'(0+) > 1
// (proxied at z = 1/grid_size), and T' diverging near 1 (proxied by growth
// across the last two grid points). grid_size >= 100.
ValidationReport validate_weighting(const WeightingSpec& w, int grid_size);

// Concavity / monotonicity spot-checks for the utility on [lo, hi].
ValidationReport validate_utility(const UtilitySpec& u, double lo, double hi,
                                  int grid_size);

// Verifies that the weighting's curvature dominates the utility's on the
// small-loss quantile region: A_T(z) > A_u(W - F^-1(z)) * (F^-1)'(z) for z in
// (0, a]. W is baseline wealth W0 - (1+rho)E[X]; a is the landmark where f
// attains its minimum. Also reports the shortcut P(X=0) >= a, under which the
// inequality holds automatically because (F^-1)' vanishes there.
ValidationReport validate_weighting_dominance(const UtilitySpec& u,
                                              const WeightingSpec& w,
                                              const LossModel& loss, double W,
                                              double a, int grid_size);

}  // namespace indemnity
