#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "indemnity/oracle.hpp"
#include "indemnity/rdu.hpp"

using namespace indemnity;

namespace {

struct Fixture {
    LossModel loss = make_truncated_exponential(0.1, 10.0);
    WeightingSpec w = WeightingSpec::tversky_kahneman(0.5);
    UtilitySpec cara = UtilitySpec::exponential(0.02);
    double W0 = 15.0;
    double rho = 0.2;

    ProblemSpec at(double pi) const { return make_problem(W0, pi, rho, loss); }
};

}  // namespace

TEST_CASE("constant-ARA deductible regime") {
    Fixture fx;
    auto sol = solve_rdu_detailed(fx.at(3.0), fx.cara, fx.w, fx.loss);
    CHECK(sol.contract.shape == Contract::Shape::Deductible);
    CHECK(sol.contract.q == doctest::Approx(0.2825108038).epsilon(1e-8));
    CHECK(sol.lambda_star == doctest::Approx(0.0164284196).epsilon(1e-7));
    CHECK_FALSE(sol.boundary);
    CHECK(sol.residual.premium_residual <= 1e-7 * (1.0 + fx.loss.mean));

    // Multiplier consistency: lambda = u'(W_Delta - x_d) f(q).
    auto prob = fx.at(3.0);
    const double xd = fx.loss.quantile(sol.contract.q);
    CHECK(sol.lambda_star ==
          doctest::Approx(fx.cara.deriv(prob.W_Delta - xd) *
                          f_value(fx.w, sol.contract.q))
              .epsilon(1e-8));

    // Premium binds: E[I] = pi / (1 + rho).
    CHECK(expected_indemnity(fx.loss, sol.contract) ==
          doctest::Approx(3.0 / 1.2).epsilon(1e-8));

    const double obj = contract_objective(prob, fx.cara, fx.w, fx.loss,
                                          sol.contract);
    CHECK(obj == doctest::Approx(0.188496915926).epsilon(1e-8));

    auto rep = check_optimality(prob, fx.cara, fx.w, fx.loss, sol.contract);
    CHECK(rep.verdict);

    CHECK(solve_rdu(prob, fx.cara, fx.w, fx.loss).q ==
          doctest::Approx(sol.contract.q));
}

TEST_CASE("constant-ARA threefold regime") {
    Fixture fx;
    auto prob = fx.at(4.0);
    auto sol = solve_rdu_detailed(prob, fx.cara, fx.w, fx.loss);
    CHECK(sol.contract.shape == Contract::Shape::Threefold);
    CHECK(sol.contract.lower == doctest::Approx(0.0155529730).epsilon(1e-7));
    CHECK(sol.contract.upper == doctest::Approx(0.1541638595).epsilon(1e-7));
    CHECK(sol.lambda_star == doctest::Approx(0.0149235704).epsilon(1e-7));

    // The flat stretch of the indemnity in loss space.
    auto [x_lo, x_hi] = loss_breakpoints(sol.contract, fx.loss);
    CHECK(x_lo == doctest::Approx(0.0988000).epsilon(1e-4));
    CHECK(x_hi == doctest::Approx(1.0253135).epsilon(1e-4));

    CHECK(expected_indemnity(fx.loss, sol.contract) ==
          doctest::Approx(4.0 / 1.2).epsilon(1e-8));
    CHECK(contract_objective(prob, fx.cara, fx.w, fx.loss, sol.contract) ==
          doctest::Approx(0.185198071076).epsilon(1e-8));

    // Stationarity at the top flat: lambda = u'(W_Delta - cap) T'(z1) with
    // the cap equal to the retained ceiling F^-1(z1) - F^-1(z2).
    const double cap = fx.loss.quantile(sol.contract.upper) -
                       fx.loss.quantile(sol.contract.lower);
    CHECK(sol.lambda_star ==
          doctest::Approx(fx.cara.deriv(prob.W_Delta - cap) *
                          f_value(fx.w, sol.contract.upper))
              .epsilon(1e-7));

    auto rep = check_optimality(prob, fx.cara, fx.w, fx.loss, sol.contract);
    CHECK(rep.verdict);
    CHECK(rep.max_violation <= rep.tolerance);
}

TEST_CASE("constant-ARA regime threshold sits at the frozen premium") {
    Fixture fx;
    const double pi_hat = 3.0868485398;
    auto below = solve_rdu_detailed(fx.at(pi_hat - 0.01), fx.cara, fx.w, fx.loss);
    CHECK(below.contract.shape == Contract::Shape::Deductible);
    auto above = solve_rdu_detailed(fx.at(pi_hat + 0.01), fx.cara, fx.w, fx.loss);
    CHECK(above.contract.shape == Contract::Shape::Threefold);
    // Just above the threshold the threefold is still nearly a deductible.
    CHECK(above.contract.lower < 0.02);
}

TEST_CASE("trivial regimes: full coverage and no coverage") {
    Fixture fx;
    // Delta <= 0: premium buys everything.
    auto full = solve_rdu_detailed(fx.at(1.2 * fx.loss.mean), fx.cara, fx.w,
                                   fx.loss);
    CHECK(full.contract.shape == Contract::Shape::Full);
    CHECK(full.lambda_star == doctest::Approx(0.0));
    auto richer = solve_rdu_detailed(fx.at(5.5), fx.cara, fx.w, fx.loss);
    CHECK(richer.contract.shape == Contract::Shape::Full);

    // pi = 0: Delta = E[X], nothing can be ceded.
    auto none = solve_rdu_detailed(fx.at(0.0), fx.cara, fx.w, fx.loss);
    CHECK(none.contract.shape == Contract::Shape::NoCoverage);
    CHECK(std::isnan(none.lambda_star));

    for (const auto& sol : {full, none}) {
        auto rep = check_optimality(fx.at(sol.contract.shape ==
                                                  Contract::Shape::Full
                                              ? 1.2 * fx.loss.mean
                                              : 0.0),
                                    fx.cara, fx.w, fx.loss, sol.contract);
        CHECK(rep.verdict);
    }
}

TEST_CASE("decreasing-ARA dispatch: outer bands") {
    Fixture fx;
    auto u = UtilitySpec::log_utility();
    // Below the lower band edge: deductible.
    auto low = solve_rdu_detailed(fx.at(3.0), u, fx.w, fx.loss);
    CHECK(low.contract.shape == Contract::Shape::Deductible);
    auto rep_low = check_optimality(fx.at(3.0), u, fx.w, fx.loss, low.contract);
    CHECK(rep_low.verdict);

    // Above the upper band edge: threefold with the frozen pair at pi = 4.5.
    auto prob = fx.at(4.5);
    auto high = solve_rdu_detailed(prob, u, fx.w, fx.loss);
    CHECK(high.contract.shape == Contract::Shape::Threefold);
    CHECK(high.contract.lower == doctest::Approx(0.0349462960).epsilon(1e-7));
    CHECK(high.contract.upper == doctest::Approx(0.1048983264).epsilon(1e-7));
    CHECK(expected_indemnity(fx.loss, high.contract) ==
          doctest::Approx(4.5 / 1.2).epsilon(1e-8));
    auto rep = check_optimality(prob, u, fx.w, fx.loss, high.contract);
    CHECK(rep.verdict);

    // Inner stationarity: residual of the solved pair is certified small.
    CHECK(std::fabs(high.residual.inner_residual) <= 1e-7);
}

TEST_CASE("decreasing-ARA dispatch: middle band follows the sign of g") {
    Fixture fx;
    auto u = UtilitySpec::log_utility();
    auto lm = compute_rdu_landmarks(fx.at(3.27), u, fx.w, fx.loss);
    const double pi_lo = (1.0 + fx.rho) * (fx.loss.mean - lm.Delta_bar);
    const double pi_hi = (1.0 + fx.rho) * (fx.loss.mean - lm.Delta_tilde);
    CHECK(pi_lo == doctest::Approx(3.2578287).epsilon(1e-5));
    CHECK(pi_hi == doctest::Approx(3.2866474).epsilon(1e-5));

    // Near the lower edge g > 0: deductible at exactly the matched quantile.
    {
        const double pi = pi_lo + 0.05 * (pi_hi - pi_lo);
        auto prob = fx.at(pi);
        auto cert = compute_landmarks(fx.w);
        const double p = invert_monotone(
            [&](double d) { return delta_of_d(d, fx.loss); }, prob.Delta,
            cert.a, cert.c);
        REQUIRE(g_value(p, fx.W0, fx.rho, u, fx.w, fx.loss) > 0.0);
        auto sol = solve_rdu_detailed(prob, u, fx.w, fx.loss);
        CHECK(sol.contract.shape == Contract::Shape::Deductible);
        CHECK(sol.contract.q == doctest::Approx(p).epsilon(1e-9));
        CHECK(check_optimality(prob, u, fx.w, fx.loss, sol.contract).verdict);
    }

    // Near the upper edge g < 0: threefold with a small but positive z2.
    {
        const double pi = pi_lo + 0.8 * (pi_hi - pi_lo);
        auto prob = fx.at(pi);
        auto cert = compute_landmarks(fx.w);
        const double p = invert_monotone(
            [&](double d) { return delta_of_d(d, fx.loss); }, prob.Delta,
            cert.a, cert.c);
        REQUIRE(g_value(p, fx.W0, fx.rho, u, fx.w, fx.loss) < 0.0);
        auto sol = solve_rdu_detailed(prob, u, fx.w, fx.loss);
        CHECK(sol.contract.shape == Contract::Shape::Threefold);
        CHECK(sol.contract.lower > 0.0);
        CHECK(sol.contract.lower < 0.01);
        CHECK(check_optimality(prob, u, fx.w, fx.loss, sol.contract).verdict);
    }
}

TEST_CASE("power utility runs through the decreasing-ARA path") {
    Fixture fx;
    auto u = UtilitySpec::power(0.6);
    for (double pi : {2.5, 4.2}) {
        auto prob = fx.at(pi);
        auto sol = solve_rdu_detailed(prob, u, fx.w, fx.loss);
        INFO("pi = ", pi);
        CHECK(sol.residual.premium_residual <= 1e-7 * (1.0 + fx.loss.mean));
        auto rep = check_optimality(prob, u, fx.w, fx.loss, sol.contract);
        CHECK(rep.verdict);
    }
}

TEST_CASE("identity utility is routed away from the concave solver") {
    Fixture fx;
    CHECK_THROWS_AS(
        solve_rdu_detailed(fx.at(3.0), UtilitySpec::identity(), fx.w, fx.loss),
        UnsupportedARAClass);
}

TEST_CASE("positive-wealth utilities demand solvent worst-case wealth") {
    Fixture fx;
    auto u = UtilitySpec::log_utility();
    // W_Delta - M = 12 - 3 - 10 < 0: log utility cannot price full retention.
    auto prob = make_problem(12.0, 3.0, fx.rho, fx.loss);
    CHECK_FALSE(prob.worst_case_solvent);
    CHECK_THROWS_AS(solve_rdu_detailed(prob, u, fx.w, fx.loss),
                    AssumptionViolated);
    // The same wealth is fine for a utility defined on all of R.
    CHECK_NOTHROW(solve_rdu_detailed(prob, fx.cara, fx.w, fx.loss));
}

TEST_CASE("threefold pair solver: guards and the deductible-side signal") {
    Fixture fx;
    auto prob3 = fx.at(3.0);
    CHECK_THROWS_AS(
        solve_threefold_pair(fx.at(5.5), fx.cara, fx.w, fx.loss,
                             make_problem(15.0, 5.5, 0.2, fx.loss).Delta,
                             Tolerance{}),
        InvalidParameter);  // Delta <= 0 has no interior pair
    // In the deductible regime the boundary residual is positive: the pair
    // equation has no root and the solver says which regime applies instead.
    CHECK_THROWS_AS(solve_threefold_pair(prob3, fx.cara, fx.w, fx.loss,
                                         prob3.Delta, Tolerance{}),
                    NoBracket);
    try {
        solve_threefold_pair(prob3, fx.cara, fx.w, fx.loss, prob3.Delta,
                             Tolerance{});
    } catch (const NoBracket& e) {
        CHECK(std::string(e.what()).find("deductible") != std::string::npos);
    }
}

TEST_CASE("solutions carry the landmark certificates they used") {
    Fixture fx;
    auto sol = solve_rdu_detailed(fx.at(4.0), fx.cara, fx.w, fx.loss);
    CHECK(sol.weighting_landmarks.a == doctest::Approx(0.0672432345).epsilon(1e-8));
    CHECK(sol.weighting_landmarks.c == doctest::Approx(0.2781320992).epsilon(1e-8));
    CHECK(sol.landmarks.l_Delta == doctest::Approx(0.2694558125).epsilon(1e-8));
    CHECK(sol.landmarks.K_Delta == doctest::Approx(1.6078591481).epsilon(1e-8));
}
