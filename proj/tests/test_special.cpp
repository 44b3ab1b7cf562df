#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "heavytail/special.hpp"
#include "oracles.hpp"

using heavytail::cosine_integral;
using heavytail::sin_cos_integrals;
using heavytail::sine_integral;

TEST_CASE("frozen sine and cosine integral values")
{
    // Reference digits computed with the series/continued-fraction oracle
    // in long double and cross-checked between the two oracle regimes.
    CHECK(cosine_integral(1.0) ==
          doctest::Approx(0.337403922900968135).epsilon(1e-15));
    CHECK(sine_integral(3.141592653589793) ==
          doctest::Approx(1.85193705198246617).epsilon(1e-15));
    CHECK(cosine_integral(3.141592653589793) ==
          doctest::Approx(0.073667912046425486).epsilon(1e-13));
}

TEST_CASE("oracle self-consistency where series and continued fraction overlap")
{
    // Both oracle branches are reliable on [4, 6]; if they agree there,
    // each is trustworthy on its own side of the split at 5.
    for (double x = 4.0; x <= 6.0; x += 0.125) {
        CHECK(static_cast<double>(oracle::si_series(x)) ==
              doctest::Approx(static_cast<double>(oracle::si_cf(x)))
                  .epsilon(1e-16));
        CHECK(static_cast<double>(oracle::ci_series(x)) ==
              doctest::Approx(static_cast<double>(oracle::ci_cf(x)))
                  .epsilon(1e-15));
    }
}

TEST_CASE("sine integral matches the oracle across regimes")
{
    // Log-spaced points cover the small-x series region, the rational
    // crossover at x = 4, and the auxiliary-function region beyond.
    for (int i = 0; i <= 400; ++i) {
        const double x = std::pow(10.0, -3.0 + 5.0 * i / 400.0);
        if (x > 100.0)
            continue;
        const double ref = oracle::si(x);
        CHECK(sine_integral(x) == doctest::Approx(ref).epsilon(3e-15));
    }
}

TEST_CASE("cosine integral matches the oracle across regimes")
{
    for (int i = 0; i <= 400; ++i) {
        const double x = std::pow(10.0, -3.0 + 5.0 * i / 400.0);
        if (x > 100.0)
            continue;
        const double ref = oracle::ci(x);
        // Ci crosses zero repeatedly; compare absolutely near roots.
        CHECK(cosine_integral(x) ==
              doctest::Approx(ref).epsilon(4e-15).scale(1.0));
    }
}

TEST_CASE("parity and domain")
{
    CHECK(sine_integral(0.0) == 0.0);
    for (double x : {0.3, 1.7, 4.5, 30.0})
        CHECK(sine_integral(-x) == -sine_integral(x));
    CHECK_THROWS_AS(cosine_integral(0.0), std::domain_error);
    CHECK_THROWS_AS(cosine_integral(-1.0), std::domain_error);
    CHECK_THROWS_AS(sin_cos_integrals(0.0), std::domain_error);
}

TEST_CASE("combined evaluation agrees with the individual functions")
{
    for (double x : {0.01, 0.5, 2.0, 3.9, 4.1, 12.0, 77.0}) {
        const heavytail::SiCi both = sin_cos_integrals(x);
        CHECK(both.si == sine_integral(x));
        CHECK(both.ci == cosine_integral(x));
    }
}

TEST_CASE("large-argument limits")
{
    // Si(x) -> pi/2 and Ci(x) -> 0 with amplitude ~ 1/x.
    const double x = 1e4;
    CHECK(std::abs(sine_integral(x) - 1.5707963267948966) < 1.1e-4);
    CHECK(std::abs(cosine_integral(x)) < 1.1e-4);
    CHECK(sine_integral(x) == doctest::Approx(oracle::si(x)).epsilon(1e-13));
    CHECK(cosine_integral(x) ==
          doctest::Approx(oracle::ci(x)).epsilon(1e-10).scale(1e-4));
}
