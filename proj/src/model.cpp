#include "heavytail/model.hpp"

#include <cmath>
#include <stdexcept>

namespace heavytail {

TailModel::TailModel(double p_, double x0_, double c1p_, double c1m_)
    : p(p_), q(1.0 - p_), x0(x0_), c1p(c1p_), c1m(c1m_)
{
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("TailModel: p must lie strictly in (0,1)");
    if (!(x0 >= 1.0))
        throw std::invalid_argument("TailModel: x0 must be >= 1");
    // Tail densities p/x^2 + 2 c1p/x^3 and q/s^2 + 2 c1m/s^3 are monotone in
    // the perturbation term, so nonnegativity on [x0, inf) reduces to the
    // value at x0.
    if (p * x0 + 2.0 * c1p < 0.0)
        throw std::invalid_argument("TailModel: upper tail density negative near x0");
    if (q * x0 + 2.0 * c1m < 0.0)
        throw std::invalid_argument("TailModel: lower tail density negative near x0");
    const double tail_mass = (p + q) / x0 + (c1p + c1m) / (x0 * x0);
    interior_mass = 1.0 - tail_mass;
    // Allow a little rounding slack at interior_mass == 0 (canonical case).
    if (interior_mass < -1e-15)
        throw std::invalid_argument("TailModel: tail mass at x0 exceeds 1");
    if (interior_mass < 0.0)
        interior_mass = 0.0;
    slab_density = interior_mass / (2.0 * x0);
}

double TailModel::tail_prob(Side side, double x) const
{
    if (!(x >= x0))
        throw std::domain_error("TailModel::tail_prob: x must be >= x0");
    if (side == Side::upper)
        return p / x + c1p / (x * x);
    return q / x + c1m / (x * x);
}

double TailModel::tail_prob_upper_extended(double x) const
{
    if (x >= x0)
        return p / x + c1p / (x * x);
    if (x >= -x0)
        return p / x0 + c1p / (x0 * x0) + slab_density * (x0 - x);
    return 1.0 - (q / (-x) + c1m / (x * x));
}

double TailModel::density(double x) const
{
    const double ax = std::abs(x);
    if (ax < x0)
        return slab_density;
    if (x >= 0.0)
        return p / (ax * ax) + 2.0 * c1p / (ax * ax * ax);
    return q / (ax * ax) + 2.0 * c1m / (ax * ax * ax);
}

double TailModel::cdf(double x) const
{
    if (x >= x0)
        return 1.0 - (p / x + c1p / (x * x));
    if (x <= -x0)
        return q / (-x) + c1m / (x * x);
    const double at_left = q / x0 + c1m / (x0 * x0);
    return at_left + slab_density * (x + x0);
}

double TailModel::quantile(double u) const
{
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("TailModel::quantile: u must lie in (0,1)");
    const double u_left = q / x0 + c1m / (x0 * x0);
    const double u_right = 1.0 - (p / x0 + c1p / (x0 * x0));
    if (u <= u_left) {
        // Solve q/s + c1m/s^2 = u for s >= x0.
        const double s = (q + std::sqrt(q * q + 4.0 * u * c1m)) / (2.0 * u);
        return -s;
    }
    if (u >= u_right) {
        const double v = 1.0 - u;
        const double s = (p + std::sqrt(p * p + 4.0 * v * c1p)) / (2.0 * v);
        return s;
    }
    return -x0 + (u - u_left) / slab_density;
}

double TailModel::truncated_mean(double a) const
{
    if (!(a >= x0))
        throw std::domain_error("TailModel::truncated_mean: a must be >= x0");
    return (p - q) * std::log(a / x0) + 2.0 * (c1p - c1m) * (1.0 / x0 - 1.0 / a);
}

Norming norming(const TailModel& model, std::uint64_t n)
{
    if (n < 1)
        throw std::invalid_argument("norming: n must be >= 1");
    const double nn = static_cast<double>(n);
    if (nn < model.x0)
        throw std::domain_error("norming: n below the tail cutoff x0");
    return {nn, nn * model.truncated_mean(nn)};
}

} // namespace heavytail
