#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "indemnity/numerics.hpp"

using namespace indemnity;

TEST_CASE("integrate handles smooth integrands to tight tolerance") {
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 30.0) ==
          doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-11));
    CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("integrate survives integrable endpoint singularities") {
    // 1/sqrt(x) at the left end
    CHECK(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0) ==
          doctest::Approx(2.0).epsilon(1e-8));
    // (1-x)^(-1/2) at the right end — the shape of T' near 1
    CHECK(integrate([](double x) { return 1.0 / std::sqrt(1.0 - x); }, 0.0,
                    1.0) == doctest::Approx(2.0).epsilon(1e-8));
    // both ends at once, like a full-interval dT integral
    CHECK(integrate(
              [](double x) { return 1.0 / std::sqrt(x * (1.0 - x)); }, 0.0,
              1.0) == doctest::Approx(M_PI).epsilon(1e-7));
}

TEST_CASE("integrate rejects reversed intervals") {
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0),
                    InvalidInterval);
}

TEST_CASE("make_bracket demands a sign change") {
    auto f = [](double x) { return x * x + 1.0; };
    CHECK_THROWS_AS(make_bracket(f, -1.0, 1.0), NoSignChange);
    const Bracket b = make_bracket([](double x) { return x - 0.25; }, 0.0, 1.0);
    CHECK(b.f_lo < 0.0);
    CHECK(b.f_hi > 0.0);
}

TEST_CASE("find_root reproduces known roots") {
    auto f = [](double x) { return std::cos(x); };
    const double r = find_root(f, make_bracket(f, 1.0, 2.0));
    CHECK(r == doctest::Approx(M_PI / 2).epsilon(1e-12));

    auto poly = [](double x) { return (x - 0.3) * (x * x + 1.0); };
    CHECK(find_root(poly, make_bracket(poly, -1.0, 1.0)) ==
          doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("find_root accepts an exact endpoint root") {
    auto f = [](double x) { return x; };
    CHECK(find_root(f, Bracket{0.0, 1.0, 0.0, 1.0}) == 0.0);
}

TEST_CASE("find_root validates its bracket") {
    auto f = [](double x) { return x; };
    CHECK_THROWS_AS(find_root(f, Bracket{1.0, 0.5, 1.0, 0.5}), InvalidInterval);
    CHECK_THROWS_AS(find_root(f, Bracket{0.5, 1.0, 0.5, 1.0}), NoSignChange);
}

TEST_CASE("invert_monotone solves f(x) = target") {
    // The bracketing root finder stops at ~0.5 * (abs_tol + rel_tol * |x|),
    // so inverse values are good to about 1e-9, not machine precision.
    CHECK(invert_monotone([](double x) { return x * x * x; }, 8.0, 0.0, 3.0) ==
          doctest::Approx(2.0).epsilon(1e-8));
    CHECK(invert_monotone([](double x) { return -x; }, -0.7, 0.0, 1.0) ==
          doctest::Approx(0.7).epsilon(1e-8));
}

TEST_CASE("minimize_unimodal finds interior minima") {
    const double m =
        minimize_unimodal([](double x) { return (x - 1.3) * (x - 1.3); }, 0.0,
                          2.0, Tolerance{1e-10, 1e-10, 500});
    CHECK(m == doctest::Approx(1.3).epsilon(1e-6));
}

TEST_CASE("tolerance defaults are the documented ones") {
    const Tolerance t;
    CHECK(t.abs_tol == 1e-10);
    CHECK(t.rel_tol == 1e-9);
    CHECK(t.max_iter == 200);
}
