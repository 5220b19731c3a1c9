#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "indemnity/oracle.hpp"
#include "indemnity/rdu.hpp"
#include "indemnity/yaari.hpp"

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

double total_volume(const DiscretizedProgram& p) {
    double v = 0.0;
    for (int i = 0; i < p.n; ++i) v += p.fill[i] * p.g[i];
    return v;
}

}  // namespace

TEST_CASE("discretization bookkeeping") {
    Fixture fx;
    auto sol = oracle_solve(fx.at(3.0), fx.cara, fx.w, fx.loss, 200);
    const auto& p = sol.program;
    CHECK(p.n == 200);
    CHECK(p.z.size() == 201);
    CHECK(p.cap.size() == 200);
    CHECK(p.z.front() == doctest::Approx(0.0));
    CHECK(p.z.back() == doctest::Approx(1.0));
    // Caps telescope to the support width, weights to T(1) - T(0) = 1.
    double cap_sum = 0.0, w_sum = 0.0;
    for (int i = 0; i < p.n; ++i) {
        CHECK(p.cap[i] >= 0.0);
        CHECK(p.g[i] >= -1e-15);
        CHECK(p.g[i] <= p.cap[i] * (1.0 + 1e-12) + 1e-15);
        cap_sum += p.cap[i];
        w_sum += p.weight[i];
    }
    CHECK(cap_sum == doctest::Approx(fx.loss.M).epsilon(1e-9));
    CHECK(w_sum == doctest::Approx(1.0).epsilon(1e-9));
    // The volume constraint binds exactly.
    CHECK(total_volume(p) == doctest::Approx(p.delta).epsilon(1e-10));
    CHECK(p.delta == doctest::Approx(fx.at(3.0).Delta).epsilon(1e-12));
}

TEST_CASE("degenerate budgets reproduce the closed endpoints") {
    Fixture fx;
    // Delta <= 0: full coverage, objective u(W_Delta) exactly.
    auto full = oracle_solve(fx.at(1.2 * fx.loss.mean + 0.1), fx.cara, fx.w,
                             fx.loss, 100);
    const double wd = fx.W0 - (1.2 * fx.loss.mean + 0.1);
    CHECK(full.objective == doctest::Approx(fx.cara.value(wd)).epsilon(1e-12));
    for (double g : full.increments) CHECK(g == doctest::Approx(0.0));

    // pi = 0: full retention. The saturated box realizes G = F^-1 exactly,
    // so the oracle value matches the no-coverage contract to quadrature
    // precision and every cell sits at its cap.
    auto none = oracle_solve(fx.at(0.0), fx.cara, fx.w, fx.loss, 400);
    const double direct = contract_objective(fx.at(0.0), fx.cara, fx.w,
                                             fx.loss, Contract::no_coverage());
    CHECK(none.objective == doctest::Approx(direct).epsilon(1e-10));
    int short_cells = 0;
    for (int i = 0; i < none.program.n; ++i)
        if (none.increments[i] < none.program.cap[i] - 1e-9) ++short_cells;
    CHECK(short_cells == 0);
    CHECK(total_volume(none.program) ==
          doctest::Approx(none.program.delta).epsilon(1e-10));
}

TEST_CASE("guards: grid floor and infeasible volume") {
    Fixture fx;
    CHECK_THROWS_AS(oracle_solve(fx.at(3.0), fx.cara, fx.w, fx.loss, 50),
                    InvalidParameter);
    ProblemSpec forged = fx.at(3.0);
    forged.Delta = fx.loss.mean + 1.0;  // no feasible retention reaches this
    CHECK_THROWS_AS(oracle_solve(forged, fx.cara, fx.w, fx.loss, 100),
                    InfeasibleDelta);
}

TEST_CASE("concave search matches the continuous optimum and its shape") {
    Fixture fx;
    auto prob = fx.at(3.0);
    auto osol = oracle_solve(prob, fx.cara, fx.w, fx.loss, 400);
    auto csol = solve_rdu_detailed(prob, fx.cara, fx.w, fx.loss);
    const double cobj = contract_objective(prob, fx.cara, fx.w, fx.loss,
                                           csol.contract);
    CHECK(osol.objective == doctest::Approx(cobj).epsilon(1e-5));
    // Discrete feasible set is a restriction: it cannot beat the continuum.
    CHECK(osol.objective <= cobj + 1e-9);

    // Shape recovery: full retention below the deductible quantile, none
    // above, transition within two cells.
    const double q = csol.contract.q;
    const auto& p = osol.program;
    for (int i = 0; i < p.n; ++i) {
        if (p.z[i + 1] < q - 2.0 / p.n)
            CHECK(osol.increments[i] ==
                  doctest::Approx(p.cap[i]).epsilon(1e-8));
        if (p.z[i] > q + 2.0 / p.n)
            CHECK(osol.increments[i] == doctest::Approx(0.0).epsilon(1e-8));
    }
    // Dual multiplier approximates the continuous one.
    CHECK(osol.lambda == doctest::Approx(csol.lambda_star).epsilon(2e-3));
}

TEST_CASE("concave search recovers the threefold layering") {
    Fixture fx;
    auto prob = fx.at(4.0);
    auto osol = oracle_solve(prob, fx.cara, fx.w, fx.loss, 400);
    auto csol = solve_rdu_detailed(prob, fx.cara, fx.w, fx.loss);
    CHECK(osol.objective ==
          doctest::Approx(contract_objective(prob, fx.cara, fx.w, fx.loss,
                                             csol.contract))
              .epsilon(1e-5));

    const double z2 = csol.contract.lower, z1 = csol.contract.upper;
    const auto& p = osol.program;
    const double slack = 2.0 / p.n;
    for (int i = 0; i < p.n; ++i) {
        if (p.z[i + 1] < z2 - slack || p.z[i] > z1 + slack)
            CHECK(osol.increments[i] == doctest::Approx(0.0).epsilon(1e-8));
        if (p.z[i] > z2 + slack && p.z[i + 1] < z1 - slack)
            CHECK(osol.increments[i] ==
                  doctest::Approx(p.cap[i]).epsilon(1e-8));
    }
}

TEST_CASE("risk-neutral fast path matches the dual-criterion solver") {
    Fixture fx;
    auto prob = fx.at(3.5);
    auto osol = oracle_solve(prob, UtilitySpec::identity(), fx.w, fx.loss, 400);
    auto ysol = solve_yaari_detailed(prob, fx.w, fx.loss);
    const double cobj = contract_objective(prob, UtilitySpec::identity(), fx.w,
                                           fx.loss, ysol.contract);
    CHECK(osol.objective == doctest::Approx(cobj).epsilon(1e-4));
    CHECK(osol.objective <= cobj + 1e-9);
    CHECK(osol.lambda_trace.empty());  // knapsack path has no dual search
    CHECK(total_volume(osol.program) ==
          doctest::Approx(prob.Delta).epsilon(1e-10));
}

TEST_CASE("dual search: volume is monotone along the lambda trace") {
    Fixture fx;
    auto osol = oracle_solve(fx.at(3.0), fx.cara, fx.w, fx.loss, 200);
    REQUIRE(osol.lambda_trace.size() >= 3);
    auto sorted = osol.lambda_trace;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 1; i < sorted.size(); ++i)
        CHECK(sorted[i].second >= sorted[i - 1].second - 1e-9);
}

TEST_CASE("refinement: successive objective gaps shrink") {
    Fixture fx;
    auto prob = fx.at(3.0);
    double prev_gap = -1.0;
    double obj_prev = oracle_solve(prob, fx.cara, fx.w, fx.loss, 100).objective;
    for (int n : {200, 400, 800}) {
        const double obj =
            oracle_solve(prob, fx.cara, fx.w, fx.loss, n).objective;
        const double gap = std::fabs(obj - obj_prev);
        if (prev_gap >= 0.0) CHECK(gap < prev_gap);
        prev_gap = gap;
        obj_prev = obj;
    }
}

TEST_CASE("contract objective: closed cases") {
    Fixture fx;
    auto prob = fx.at(3.0);
    // Full coverage retains nothing: u(W_Delta) exactly.
    CHECK(contract_objective(prob, fx.cara, fx.w, fx.loss, Contract::full()) ==
          doctest::Approx(fx.cara.value(prob.W_Delta)).epsilon(1e-12));
    // No coverage: direct quadrature cross-check.
    const double direct = integrate(
        [&](double z) {
            return fx.cara.value(prob.W_Delta - fx.loss.quantile(z)) *
                   fx.w.deriv(z);
        },
        0.0, 1.0, Tolerance{1e-12, 1e-11, 400});
    CHECK(contract_objective(prob, fx.cara, fx.w, fx.loss,
                             Contract::no_coverage()) ==
          doctest::Approx(direct).epsilon(1e-9));
    // Identity utility, full coverage: certainty W_Delta.
    CHECK(contract_objective(prob, UtilitySpec::identity(), fx.w, fx.loss,
                             Contract::full()) ==
          doctest::Approx(prob.W_Delta).epsilon(1e-12));
}

TEST_CASE("optimality check certifies the solved contracts") {
    Fixture fx;
    for (double pi : {3.0, 4.0}) {
        auto prob = fx.at(pi);
        auto sol = solve_rdu_detailed(prob, fx.cara, fx.w, fx.loss);
        auto rep = check_optimality(prob, fx.cara, fx.w, fx.loss, sol.contract);
        INFO("pi = ", pi);
        CHECK(rep.verdict);
        CHECK(rep.max_violation <= rep.tolerance);
        CHECK(rep.premium_residual <= 1e-6 * (1.0 + prob.Delta));
        CHECK(rep.violations.empty());
    }
    // Reconstructed multiplier matches the solver's.
    auto rep3 = check_optimality(fx.at(3.0), fx.cara, fx.w, fx.loss,
                                 Contract::deductible(0.2825108038));
    CHECK(rep3.lambda_star == doctest::Approx(0.0164284196).epsilon(1e-7));
}

TEST_CASE("optimality check rejects perturbed-but-feasible candidates") {
    Fixture fx;

    // Threefold with the upper kink shifted, premium re-bound through the
    // lower kink: feasible, binding, not optimal.
    {
        auto prob = fx.at(4.0);
        auto sol = solve_rdu_detailed(prob, fx.cara, fx.w, fx.loss);
        const double z1 = sol.contract.upper + 0.05;
        const double target = k_of(z1, fx.loss) - prob.Delta;
        const double z2 = invert_monotone(
            [&](double t) { return k_of(t, fx.loss); }, target, 0.0, z1);
        auto cand = Contract::threefold(z2, z1);
        REQUIRE(std::fabs(expected_indemnity(fx.loss, cand) -
                          4.0 / 1.2) < 1e-7);
        auto rep = check_optimality(prob, fx.cara, fx.w, fx.loss, cand);
        CHECK_FALSE(rep.verdict);
        CHECK(rep.max_violation > rep.tolerance);
        CHECK_FALSE(rep.violations.empty());
    }

    // Deductible premium re-bound into the wrong shape.
    {
        auto prob = fx.at(3.0);
        auto sol = solve_rdu_detailed(prob, fx.cara, fx.w, fx.loss);
        const double z1 = std::min(sol.contract.q + 0.05, 0.995);
        const double target = k_of(z1, fx.loss) - prob.Delta;
        const double z2 = invert_monotone(
            [&](double t) { return k_of(t, fx.loss); }, target, 0.0, z1);
        REQUIRE(z2 > 0.0);
        auto cand = Contract::threefold(z2, z1);
        auto rep = check_optimality(prob, fx.cara, fx.w, fx.loss, cand);
        CHECK_FALSE(rep.verdict);
    }

    // Slack budget (Delta <= 0): anything short of full coverage fails.
    {
        auto prob = fx.at(5.5);
        CHECK(check_optimality(prob, fx.cara, fx.w, fx.loss, Contract::full())
                  .verdict);
        CHECK_FALSE(check_optimality(prob, fx.cara, fx.w, fx.loss,
                                     Contract::deductible(0.3))
                        .verdict);
        CHECK_FALSE(check_optimality(prob, fx.cara, fx.w, fx.loss,
                                     Contract::no_coverage())
                        .verdict);
    }

    // Premium violation alone sinks the verdict.
    {
        auto prob = fx.at(3.0);
        auto rep = check_optimality(prob, fx.cara, fx.w, fx.loss,
                                    Contract::full());
        CHECK_FALSE(rep.verdict);
        CHECK(rep.premium_residual > 1e-3);
    }
}

TEST_CASE("no-coverage candidates are feasibility-checked only") {
    Fixture fx;
    auto prob = fx.at(0.0);
    auto rep = check_optimality(prob, fx.cara, fx.w, fx.loss,
                                Contract::no_coverage());
    CHECK(rep.verdict);
    CHECK(std::isnan(rep.lambda_star));
}
