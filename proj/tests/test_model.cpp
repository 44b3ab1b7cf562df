#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "heavytail/model.hpp"
#include "heavytail/quadrature.hpp"

using heavytail::Norming;
using heavytail::Side;
using heavytail::TailModel;

TEST_CASE("constructor validation")
{
    CHECK_THROWS_AS(TailModel(0.0), std::invalid_argument);
    CHECK_THROWS_AS(TailModel(1.0), std::invalid_argument);
    CHECK_THROWS_AS(TailModel(-0.2), std::invalid_argument);
    CHECK_THROWS_AS(TailModel(0.5, 0.5), std::invalid_argument);
    // Tail density p/x^2 + 2 c1p/x^3 must stay nonnegative at x0.
    CHECK_THROWS_AS(TailModel(0.5, 1.0, -0.3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(TailModel(0.5, 1.0, 0.0, -0.3), std::invalid_argument);
    CHECK_NOTHROW(TailModel(0.5, 2.0, -0.45, 0.1));
}

TEST_CASE("canonical model basics")
{
    const TailModel m(0.7);
    CHECK(m.canonical());
    CHECK(m.q == doctest::Approx(0.3).epsilon(1e-16));
    CHECK(m.interior_mass == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(m.tail_prob(Side::upper, 1.0) == 0.7);
    CHECK(m.tail_prob(Side::upper, 2.0) == 0.35);
    CHECK(m.tail_prob(Side::lower, 3.0) == doctest::Approx(0.1));
    CHECK_THROWS_AS(m.tail_prob(Side::upper, 0.5), std::domain_error);
}

TEST_CASE("frozen quantiles, p = 0.7")
{
    const TailModel m(0.7);
    // u < q: X = -q/u; u >= q: X = p/(1-u).
    CHECK(m.quantile(0.15) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(m.quantile(0.6) == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(m.quantile(0.3) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("quantile and cdf are mutual inverses")
{
    for (const TailModel& m :
         {TailModel(0.7), TailModel(0.5), TailModel(0.6, 2.0, 0.05, -0.02),
          TailModel(0.3, 1.5, 0.1, 0.2)}) {
        for (int i = 1; i < 200; ++i) {
            const double u = i / 200.0;
            const double x = m.quantile(u);
            CHECK(m.cdf(x) == doctest::Approx(u).epsilon(1e-11).scale(1.0));
        }
        for (double x : {-40.0, -7.5, -2.2, 2.2, 6.0, 55.0}) {
            if (std::abs(x) < m.x0)
                continue;
            CHECK(m.quantile(m.cdf(x)) ==
                  doctest::Approx(x).epsilon(1e-10));
        }
    }
}

TEST_CASE("extended upper tail is a bridge between the two tails")
{
    for (const TailModel& m :
         {TailModel(0.7), TailModel(0.6, 2.0, 0.05, -0.02)}) {
        // Continuity at the support edges.
        CHECK(m.tail_prob_upper_extended(m.x0) ==
              doctest::Approx(m.tail_prob(Side::upper, m.x0)));
        CHECK(m.tail_prob_upper_extended(-m.x0) ==
              doctest::Approx(1.0 - m.tail_prob(Side::lower, m.x0)));
        // Agreement with 1 - cdf everywhere.
        for (double x = -8.0; x <= 8.0; x += 0.17)
            CHECK(m.tail_prob_upper_extended(x) ==
                  doctest::Approx(1.0 - m.cdf(x)).epsilon(1e-13).scale(1.0));
        // Monotone nonincreasing.
        double prev = 1.0;
        for (double x = -50.0; x <= 50.0; x += 0.5) {
            const double v = m.tail_prob_upper_extended(x);
            CHECK(v <= prev + 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("density integrates to the book-kept masses")
{
    const TailModel m(0.6, 2.0, 0.05, -0.02);
    auto dens = [&m](double x) {
        return std::complex<double>(m.density(x), 0.0);
    };
    // Interior slab.
    const heavytail::QuadResult interior =
        heavytail::adaptive_integral(dens, -m.x0, m.x0, 1e-12);
    CHECK(interior.value.real() ==
          doctest::Approx(m.interior_mass).epsilon(1e-10));
    // Right tail out to X, plus the analytic remainder p/X + c1p/X^2.
    const double X = 1e6;
    const heavytail::QuadResult right =
        heavytail::adaptive_integral(dens, m.x0, X, 1e-12, {4.0, 32.0, 1e3});
    CHECK(right.value.real() + m.tail_prob(Side::upper, X) ==
          doctest::Approx(m.tail_prob(Side::upper, m.x0)).epsilon(1e-9));
}

TEST_CASE("truncated mean: frozen value and quadrature cross-check")
{
    const TailModel canon(0.7);
    // (p - q) ln(100) with p - q = 0.4.
    CHECK(canon.truncated_mean(100.0) ==
          doctest::Approx(1.8420680743952367).epsilon(1e-14));
    CHECK(TailModel(0.5).truncated_mean(1e6) == 0.0);

    const TailModel m(0.6, 2.0, 0.05, -0.02);
    auto xdens = [&m](double x) {
        return std::complex<double>(x * m.density(x), 0.0);
    };
    const double a = 50.0;
    const heavytail::QuadResult mean = heavytail::adaptive_integral(
        xdens, -a, a, 1e-12, {-m.x0, m.x0, -10.0, 10.0});
    CHECK(mean.value.real() ==
          doctest::Approx(m.truncated_mean(a)).epsilon(1e-9));
}

TEST_CASE("norming sequences")
{
    const TailModel m(0.7);
    const Norming nrm = heavytail::norming(m, 50);
    CHECK(nrm.a_n == 50.0);
    CHECK(nrm.b_n ==
          doctest::Approx(50.0 * m.truncated_mean(50.0)).epsilon(1e-15));
    CHECK(heavytail::norming(TailModel(0.5), 100).b_n == 0.0);
    CHECK_THROWS_AS(heavytail::norming(m, 0), std::invalid_argument);
    CHECK_THROWS_AS(heavytail::norming(TailModel(0.6, 3.0), 2),
                    std::domain_error);
}
