#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "indemnity/errors.hpp"
#include "indemnity/numerics.hpp"

namespace indemnity {

// Loss distribution on [0, M] with a strictly increasing cdf on (0, M],
// optionally carrying an atom at 0. Everything downstream works on the
// quantile representation, so the quantile and its a.e. derivative are
// first-class here; the cdf is kept for loss-space views and sampling.
struct LossModel {
    double M = 0.0;      // support upper bound
    double atom0 = 0.0;  // P(X = 0)
    double mean = 0.0;   // E[X]

    std::function<double(double)> cdf;             // [0,M] -> [0,1]
    std::function<double(double)> quantile;        // [0,1] -> [0,M]
    std::function<double(double)> quantile_deriv;  // a.e. derivative, >= 0

    std::string family;  // "truncated_exponential" | "atom_exponential"
    double p1 = 0.0, p2 = 0.0;  // family parameters (m | gamma, eta)
};

// Exponential with rate m conditioned on [0, M]:
//   F(x) = (1 - e^(-m x)) / (1 - e^(-m M)).
LossModel make_truncated_exponential(double m, double M);

// Mixture with mass at zero: F(x) = (1 - gamma e^(-eta x)) / (1 - gamma e^(-eta M)),
// so P(X=0) = (1 - gamma) / (1 - gamma e^(-eta M)). gamma in (0,1).
LossModel make_atom_exponential(double gamma, double eta, double M);

// Insurance contract, stored by quantile-space thresholds. Loss-space
// breakpoints are derived views (see loss_breakpoints) since the solvers
// characterize everything on [0,1] and atoms make the loss-space picture
// ambiguous.
struct Contract {
    enum class Shape { Full, NoCoverage, Deductible, Threefold };

    Shape shape = Shape::Full;
    double lower = 0.0;  // Threefold: where full coverage of small losses stops
    double upper = 0.0;  // Threefold: where slope-1 coverage resumes
    double q = 0.0;      // Deductible: quantile of the deductible point

    static Contract full();
    static Contract no_coverage();
    static Contract deductible(double q);
    static Contract threefold(double lower, double upper);
};

// (x_lo, x_hi) for Threefold, (x_d, x_d) for Deductible, (0,0)/(M,M) trivials.
std::pair<double, double> loss_breakpoints(const Contract& c, const LossModel& loss);

// Indemnity I(x): 0 <= I(x) - I(y) <= x - y for x > y, I(0) = 0.
double indemnity_at(const Contract& c, const LossModel& loss, double x);

// Retention R(x) = x - I(x).
double retention_at(const Contract& c, const LossModel& loss, double x);

// Quantile function G = F^-1 of the retained loss R(X); the decision variable
// of the entire solver stack. value() is G, derivative() its a.e. slope,
// which lies in [0, (F^-1)'] cell by cell.
struct QuantileSolution {
    Contract contract;
    const LossModel* loss = nullptr;

    double value(double z) const;
    double derivative(double z) const;
};

// E[I(X)] = E[X] - integral of G over [0,1], by quadrature on the quantile
// representation.
double expected_indemnity(const LossModel& loss, const Contract& c,
                          const Tolerance& tol = {});

// Monte Carlo cross-check of expected_indemnity via inverse-transform
// sampling; returns (estimate, standard_error).
std::pair<double, double> mc_expected_indemnity(const LossModel& loss,
                                                const Contract& c,
                                                std::int64_t n_samples,
                                                std::uint64_t seed);

}  // namespace indemnity
