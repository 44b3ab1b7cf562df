#include "heavytail/special.hpp"

#include <cmath>
#include <stdexcept>

namespace heavytail {

namespace {

// Rational (Pade-type) fits for the sine/cosine integrals.  For x^2 <= 16 a
// direct rational approximation to Si is used.  For x^2 > 16 we evaluate the
// standard auxiliary functions
//     f(x) = int_0^inf sin(t) / (t + x) dt,
//     g(x) = int_0^inf cos(t) / (t + x) dt,
// from which
//     Si(x) = pi/2 - f(x) cos(x) - g(x) sin(x),
//     Ci(x) =        f(x) sin(x) - g(x) cos(x).
// Coefficients give roughly 1e-16 relative accuracy in their regimes.

double si_small(double x)
{
    const double x2 = x * x;
    const double num =
        x * (1.0 +
        x2 * (-4.54393409816329991e-2 +
        x2 * (1.15457225751016682e-3 +
        x2 * (-1.41018536821330254e-5 +
        x2 * (9.43280809438713025e-8 +
        x2 * (-3.53201978997168357e-10 +
        x2 * (7.08240282274875911e-13 +
        x2 * (-6.05338212010422477e-16))))))));
    const double den =
        1.0 +
        x2 * (1.01162145739225565e-2 +
        x2 * (4.99175116169755106e-5 +
        x2 * (1.55654986308745614e-7 +
        x2 * (3.28067571055789734e-10 +
        x2 * (4.5049097575386581e-13 +
        x2 * (3.21107051193712168e-16))))));
    return num / den;
}

double aux_f(double x)
{
    const double y = 1.0 / (x * x);
    const double num =
        1.0 +
        y * (7.44437068161936700618e2 +
        y * (1.96396372895146869801e5 +
        y * (2.37750310125431834034e7 +
        y * (1.43073403821274636888e9 +
        y * (4.33736238870432522765e10 +
        y * (6.40533830574022022911e11 +
        y * (4.20968180571076940208e12 +
        y * (1.00795182980368574617e13 +
        y * (4.94816688199951963482e12 +
        y * (-4.94701168645415959931e11))))))))));
    const double den =
        x * (1.0 +
        y * (7.46437068161927678031e2 +
        y * (1.97865247031583951450e5 +
        y * (2.41535670165126845144e7 +
        y * (1.47478952192985464958e9 +
        y * (4.58595115847765779830e10 +
        y * (7.08501308149515401563e11 +
        y * (5.06084464593475076774e12 +
        y * (1.43468549171581016479e13 +
        y * (1.11535493509914254097e13))))))))));
    return num / den;
}

double aux_g(double x)
{
    const double y = 1.0 / (x * x);
    const double num =
        y * (1.0 +
        y * (8.1359520115168615e2 +
        y * (2.35239181626478200e5 +
        y * (3.12557570795778731e7 +
        y * (2.06297595146763354e9 +
        y * (6.83052205423625007e10 +
        y * (1.09049528450362786e12 +
        y * (7.57664583257834349e12 +
        y * (1.81004487464664575e13 +
        y * (6.43291613143049485e12 +
        y * (-1.36517137670871689e12)))))))))));
    const double den =
        1.0 +
        y * (8.19595201151451564e2 +
        y * (2.40036752835578777e5 +
        y * (3.26026661647090822e7 +
        y * (2.23355543278099360e9 +
        y * (7.87465017341829930e10 +
        y * (1.39866710696414565e12 +
        y * (1.17164723371736605e13 +
        y * (4.01839087307656620e13 +
        y * (3.99653257887490811e13)))))))));
    return num / den;
}

// Alternating series for Ci valid up to x = 4:
//     Ci(x) = gamma + ln(x) + sum_{k>=1} (-1)^k x^(2k) / (2k (2k)!).
// At x = 4 the k = 16 term is below 1e-18, so 24 terms are ample.
double ci_small(double x)
{
    const double x2 = -x * x;
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 24; ++k) {
        term *= x2 / (2.0 * k * (2.0 * k - 1.0));
        const double contrib = term / (2.0 * k);
        sum += contrib;
        if (std::abs(contrib) < 1e-18 * (std::abs(sum) + 1e-30))
            break;
    }
    return euler_gamma + std::log(x) + sum;
}

} // namespace

double sine_integral(double x)
{
    if (x < 0.0)
        return -sine_integral(-x);
    if (x * x <= 16.0)
        return si_small(x);
    const double f = aux_f(x);
    const double g = aux_g(x);
    return 1.5707963267948966 - f * std::cos(x) - g * std::sin(x);
}

double cosine_integral(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("cosine_integral: requires x > 0");
    if (x <= 4.0)
        return ci_small(x);
    const double f = aux_f(x);
    const double g = aux_g(x);
    return f * std::sin(x) - g * std::cos(x);
}

SiCi sin_cos_integrals(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("sin_cos_integrals: requires x > 0");
    if (x <= 4.0)
        return {si_small(x), ci_small(x)};
    const double f = aux_f(x);
    const double g = aux_g(x);
    const double s = std::sin(x);
    const double c = std::cos(x);
    return {1.5707963267948966 - f * c - g * s, f * s - g * c};
}

} // namespace heavytail
