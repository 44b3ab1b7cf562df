#include "heavytail/smoother.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "heavytail/quadrature.hpp"

namespace heavytail {

namespace {

constexpr double pi = 3.141592653589793238462643383279503;

double ipow(double x, int n)
{
    double r = 1.0;
    while (n > 0) {
        if (n & 1)
            r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

long double ipow_l(long double x, int n)
{
    long double r = 1.0L;
    while (n > 0) {
        if (n & 1)
            r *= x;
        x *= x;
        n >>= 1;
    }
    return r;
}

long double factorial_l(int n)
{
    long double f = 1.0L;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

// (1 - cos y) / y^2, series-guarded near the origin.
double one_minus_cos_over_sq(double y)
{
    const double ay = std::abs(y);
    if (ay < 1e-4) {
        const double y2 = y * y;
        return 0.5 - y2 / 24.0 + y2 * y2 / 720.0;
    }
    const double h = std::sin(0.5 * y);
    return 2.0 * h * h / (y * y);
}

} // namespace

double cardinal_bspline(int m, double u, int deriv)
{
    if (m < 2 || m > 32)
        throw std::invalid_argument("cardinal_bspline: order must be in [2, 32]");
    if (deriv < 0 || deriv > 2 || m - 1 - deriv < 1)
        throw std::invalid_argument("cardinal_bspline: unsupported derivative");
    if (u <= 0.0 || u >= static_cast<double>(m))
        return 0.0;
    // The spline is symmetric about m/2.  Evaluate on the left half: near
    // the right edge the truncated-power sum cancels catastrophically,
    // while the reflected argument needs only a few well-scaled terms.
    double sign = 1.0;
    if (u > 0.5 * m) {
        u = static_cast<double>(m) - u;
        if (deriv == 1)
            sign = -1.0;
    }
    const int pw = m - 1 - deriv;
    const int jmax = static_cast<int>(std::floor(u));
    long double bin = 1.0L;   // binom(m, j), updated incrementally
    long double sum = 0.0L;
    for (int j = 0; j <= jmax; ++j) {
        if (j > 0)
            bin = bin * (m - j + 1) / j;
        const long double term = bin * ipow_l(u - j, pw);
        sum += (j & 1) ? -term : term;
    }
    return static_cast<double>(sign * (sum / factorial_l(pw)));
}

SmootherSpec::SmootherSpec(double epsilon_, int k_, double a_budget_)
    : epsilon(epsilon_), k(k_), a_budget(a_budget_)
{
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("SmootherSpec: epsilon must lie in (0,1)");
    if (k < 2 || k > 16)
        throw std::invalid_argument("SmootherSpec: k must lie in [2, 16]");
    if (!(a_budget > 2.0 && a_budget < 2.0 * k - 1.0))
        throw std::invalid_argument(
            "SmootherSpec: budget exponent must lie in (2, 2k-1) so the "
            "smoother tail can beat the target rate");
    tri_halfwidth = epsilon / k;
    center_norm = cardinal_bspline(2 * k, static_cast<double>(k));

    // Normalizing constant Z = int f_a(x)^k dx.  The integrand is even and
    // falls off like x^{-2k}; integrate lobe by lobe out to where the
    // analytic tail bound coef * X^{1-2k} is far below the head.
    const double a = tri_halfwidth;
    auto fa_pow = [a, kk = k](double x) -> std::complex<double> {
        return ipow(one_minus_cos_over_sq(a * x) * a / pi, kk);
    };
    const double lobe = 2.0 * pi / a;
    const double coef = std::pow(2.0 / (pi * a), k) / (2.0 * k - 1.0);
    const double head_scale = ipow(a / (2.0 * pi), k) * lobe;
    double X = std::pow(coef / (1e-18 * head_scale), 1.0 / (2.0 * k - 1.0));
    X = std::max(X, 4.0 * lobe);
    std::vector<double> seeds;
    for (double x = lobe; x < X && seeds.size() < 256; x += lobe)
        seeds.push_back(x);
    QuadResult zr =
        adaptive_integral(fa_pow, 0.0, X, 1e-12 * head_scale, seeds, 20000);
    density_norm = 2.0 * zr.value.real();

    const double B = (2.0 / density_norm) * coef;
    tail_constant = std::pow(B, (2.0 * k - 2.0) / (2.0 * k - 1.0));
}

SmootherJet smoother_jet(const SmootherSpec& spec, double t)
{
    if (std::abs(t) >= spec.epsilon)
        return {0.0, 0.0, 0.0};
    const int m = 2 * spec.k;
    const double scale = spec.k / spec.epsilon;
    double u = (t + spec.epsilon) * scale;
    // Same left-half reflection as cardinal_bspline; the first derivative
    // picks up the sign of the substitution.
    double sign1 = 1.0;
    if (u > static_cast<double>(spec.k)) {
        u = static_cast<double>(m) - u;
        sign1 = -1.0;
    }
    const int jmax = static_cast<int>(std::floor(u));
    // One fused pass for M_2k and both derivatives: the three alternating
    // sums share the (u-j) powers.
    long double bin = 1.0L;
    long double s0 = 0.0L, s1 = 0.0L, s2 = 0.0L;
    for (int j = 0; j <= jmax; ++j) {
        if (j > 0)
            bin = bin * (m - j + 1) / j;
        const long double w = u - j;
        const long double p2 = ipow_l(w, m - 3);
        const long double p1 = p2 * w;
        const long double p0 = p1 * w;
        if (j & 1) {
            s0 -= bin * p0;
            s1 -= bin * p1;
            s2 -= bin * p2;
        } else {
            s0 += bin * p0;
            s1 += bin * p1;
            s2 += bin * p2;
        }
    }
    const long double f3 = factorial_l(m - 3);
    const long double f2 = f3 * (m - 2);
    const long double f1 = f2 * (m - 1);
    SmootherJet out;
    out.value = static_cast<double>(s0 / f1) / spec.center_norm;
    out.d1 = sign1 * scale * static_cast<double>(s1 / f2) / spec.center_norm;
    out.d2 = scale * scale * static_cast<double>(s2 / f3) / spec.center_norm;
    return out;
}

double smoother_density(const SmootherSpec& spec, double x)
{
    const double a = spec.tri_halfwidth;
    return ipow(one_minus_cos_over_sq(a * x) * a / pi, spec.k) /
           spec.density_norm;
}

double smoother_tail_budget(const SmootherSpec& spec, double z)
{
    if (!(z > 0.0))
        throw std::domain_error("smoother_tail_budget: z must be > 0");
    return spec.tail_constant / std::pow(z, 2.0 * spec.k - 2.0);
}

} // namespace heavytail
