#include "indemnity/loss_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

namespace indemnity {

LossModel make_truncated_exponential(double m, double M) {
    if (!(m > 0.0) || !(M > 0.0))
        throw InvalidParameter("truncated_exponential: need m > 0 and M > 0");
    LossModel lm;
    lm.M = M;
    lm.atom0 = 0.0;
    const double k = 1.0 - std::exp(-m * M);
    lm.mean = 1.0 / m - M * std::exp(-m * M) / k;
    lm.cdf = [m, k](double x) { return (1.0 - std::exp(-m * x)) / k; };
    lm.quantile = [m, k](double z) {
        if (z >= 1.0) return -std::log1p(-k) / m;  // = M, exactly the endpoint
        return -std::log1p(-z * k) / m;
    };
    lm.quantile_deriv = [m, k](double z) { return k / (m * (1.0 - z * k)); };
    lm.family = "truncated_exponential";
    lm.p1 = m;
    return lm;
}

LossModel make_atom_exponential(double gamma, double eta, double M) {
    if (!(gamma > 0.0) || !(gamma < 1.0))
        throw InvalidParameter("atom_exponential: need gamma in (0,1)");
    if (!(eta > 0.0) || !(M > 0.0))
        throw InvalidParameter("atom_exponential: need eta > 0 and M > 0");
    LossModel lm;
    lm.M = M;
    const double D = 1.0 - gamma * std::exp(-eta * M);
    lm.atom0 = (1.0 - gamma) / D;
    // E[X] = int_{atom0}^1 F^-1(z) dz with F^-1(z) = -ln((1-zD)/gamma)/eta.
    // Antiderivative of ln(1-zD) is -(1-zD)(ln(1-zD)-1)/D; the boundary values
    // of 1-zD are gamma (at atom0) and gamma e^(-eta M) (at 1).
    {
        const double v1 = gamma * std::exp(-eta * M);
        auto anti = [D](double v) { return -v * (std::log(v) - 1.0) / D; };
        const double int_log = anti(v1) - anti(gamma);
        lm.mean = (-int_log + std::log(gamma) * (1.0 - lm.atom0)) / eta;
    }
    const double a0 = lm.atom0;
    lm.cdf = [gamma, eta, D](double x) {
        return (1.0 - gamma * std::exp(-eta * x)) / D;
    };
    lm.quantile = [gamma, eta, D, a0](double z) {
        if (z <= a0) return 0.0;
        return -std::log((1.0 - z * D) / gamma) / eta;
    };
    lm.quantile_deriv = [eta, D, a0](double z) {
        if (z < a0) return 0.0;
        return D / (eta * (1.0 - z * D));
    };
    lm.family = "atom_exponential";
    lm.p1 = gamma;
    lm.p2 = eta;
    return lm;
}

Contract Contract::full() { return Contract{Shape::Full, 0.0, 0.0, 0.0}; }

Contract Contract::no_coverage() {
    return Contract{Shape::NoCoverage, 0.0, 0.0, 0.0};
}

Contract Contract::deductible(double q) {
    if (!(q >= 0.0) || !(q <= 1.0))
        throw InvalidParameter("contract: deductible quantile must lie in [0,1]");
    return Contract{Shape::Deductible, 0.0, 0.0, q};
}

Contract Contract::threefold(double lower, double upper) {
    if (!(lower >= 0.0) || !(lower < upper) || !(upper <= 1.0))
        throw InvalidParameter(
            "contract: threefold thresholds need 0 <= lower < upper <= 1");
    return Contract{Shape::Threefold, lower, upper, 0.0};
}

std::pair<double, double> loss_breakpoints(const Contract& c,
                                           const LossModel& loss) {
    switch (c.shape) {
        case Contract::Shape::Full: return {0.0, 0.0};
        case Contract::Shape::NoCoverage: return {loss.M, loss.M};
        case Contract::Shape::Deductible: {
            const double xd = loss.quantile(c.q);
            return {xd, xd};
        }
        case Contract::Shape::Threefold:
            return {loss.quantile(c.lower), loss.quantile(c.upper)};
    }
    return {0.0, 0.0};  // unreachable
}

double indemnity_at(const Contract& c, const LossModel& loss, double x) {
    if (x < 0.0 || x > loss.M * (1.0 + 1e-12))
        throw OutOfDomain("indemnity_at: loss x=" + std::to_string(x) +
                          " outside [0, " + std::to_string(loss.M) + "]");
    switch (c.shape) {
        case Contract::Shape::Full: return x;
        case Contract::Shape::NoCoverage: return 0.0;
        case Contract::Shape::Deductible:
            return std::max(0.0, x - loss.quantile(c.q));
        case Contract::Shape::Threefold: {
            const auto [x_lo, x_hi] = loss_breakpoints(c, loss);
            if (x <= x_lo) return x;
            if (x < x_hi) return x_lo;
            return x - x_hi + x_lo;
        }
    }
    return 0.0;  // unreachable
}

double retention_at(const Contract& c, const LossModel& loss, double x) {
    return x - indemnity_at(c, loss, x);
}

double QuantileSolution::value(double z) const {
    const auto& lm = *loss;
    switch (contract.shape) {
        case Contract::Shape::Full: return 0.0;
        case Contract::Shape::NoCoverage: return lm.quantile(z);
        case Contract::Shape::Deductible:
            return std::min(lm.quantile(z), lm.quantile(contract.q));
        case Contract::Shape::Threefold: {
            const double base = lm.quantile(contract.lower);
            const double cap = lm.quantile(contract.upper) - base;
            return std::clamp(lm.quantile(z) - base, 0.0, cap);
        }
    }
    return 0.0;  // unreachable
}

double QuantileSolution::derivative(double z) const {
    const auto& lm = *loss;
    switch (contract.shape) {
        case Contract::Shape::Full: return 0.0;
        case Contract::Shape::NoCoverage: return lm.quantile_deriv(z);
        case Contract::Shape::Deductible:
            return z < contract.q ? lm.quantile_deriv(z) : 0.0;
        case Contract::Shape::Threefold:
            return (z > contract.lower && z < contract.upper)
                       ? lm.quantile_deriv(z)
                       : 0.0;
    }
    return 0.0;  // unreachable
}

double expected_indemnity(const LossModel& loss, const Contract& c,
                          const Tolerance& tol) {
    QuantileSolution g{c, &loss};
    const double retained = integrate([&](double z) { return g.value(z); }, 0.0,
                                      1.0, tol);
    return loss.mean - retained;
}

std::pair<double, double> mc_expected_indemnity(const LossModel& loss,
                                                const Contract& c,
                                                std::int64_t n_samples,
                                                std::uint64_t seed) {
    if (n_samples < 2)
        throw InvalidParameter("mc_expected_indemnity: need at least 2 samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const double x = loss.quantile(unif(rng));
        const double v = indemnity_at(c, loss, x);
        sum += v;
        sumsq += v * v;
    }
    const double n = static_cast<double>(n_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    return {mean, std::sqrt(var / n)};
}

}  // namespace indemnity
