#include "heavytail/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace heavytail {

namespace {

constexpr double pi = 3.141592653589793238462643383279503;

using GK15 = boost::math::quadrature::gauss_kronrod<double, 15>;
using G7 = boost::math::quadrature::gauss<double, 7>;

} // namespace

QuadResult gk_panel(const ComplexFn& f, double a, double b)
{
    const auto& xk = GK15::abscissa();   // 8 nonnegative nodes, xk[0] = 0
    const auto& wk = GK15::weights();
    const auto& wg = G7::weights();      // 4 weights; G7 nodes are xk[0,2,4,6]

    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);

    const std::complex<double> f0 = f(mid);
    std::complex<double> k15 = wk[0] * f0;
    std::complex<double> g7 = wg[0] * f0;
    for (unsigned i = 1; i < 8; ++i) {
        const std::complex<double> fp = f(mid + half * xk[i]);
        const std::complex<double> fm = f(mid - half * xk[i]);
        k15 += wk[i] * (fp + fm);
        if ((i & 1u) == 0u)
            g7 += wg[i / 2] * (fp + fm);
    }
    QuadResult out;
    out.value = k15 * half;
    out.error = std::abs(k15 - g7) * std::abs(half);
    out.evaluations = 15;
    return out;
}

QuadResult adaptive_integral(const ComplexFn& f, double a, double b,
                             double abs_tol,
                             const std::vector<double>& breakpoints,
                             std::size_t max_panels)
{
    if (!(abs_tol > 0.0))
        throw std::invalid_argument("adaptive_integral: abs_tol must be > 0");
    if (a == b)
        return {};
    const double sign = (a < b) ? 1.0 : -1.0;
    const double lo = std::min(a, b), hi = std::max(a, b);

    std::vector<double> edges{lo, hi};
    for (double x : breakpoints)
        if (x > lo && x < hi)
            edges.push_back(x);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    struct Panel {
        double a, b;
        std::complex<double> value;
        double error;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    std::priority_queue<Panel> heap;
    QuadResult out;
    double total_err = 0.0;
    std::complex<double> total = 0.0;

    auto push = [&](double pa, double pb) {
        QuadResult r = gk_panel(f, pa, pb);
        out.evaluations += r.evaluations;
        heap.push({pa, pb, r.value, r.error});
        total += r.value;
        total_err += r.error;
    };
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        push(edges[i], edges[i + 1]);

    while (total_err > abs_tol && heap.size() < max_panels) {
        Panel worst = heap.top();
        heap.pop();
        total -= worst.value;
        total_err -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // Interval at rounding resolution; keep its estimate as is.
            total += worst.value;
            total_err += worst.error;
            break;
        }
        push(worst.a, mid);
        push(mid, worst.b);
    }
    if (total_err > abs_tol)
        throw std::runtime_error("adaptive_integral: tolerance not reached "
                                 "within the panel budget");
    out.value = sign * total;
    out.error = total_err;
    return out;
}

QuadResult inner_window_integral(const ComplexFn& f, double M, double abs_tol)
{
    if (!(M > 0.0))
        throw std::invalid_argument("inner_window_integral: M must be > 0");
    const double h = pi / M;
    const double s0 = -std::log(h);
    const double s1 = s0 + 45.0;   // e^{-45} ~ 3e-20 leaves nothing behind

    ComplexFn mapped = [&f](double s) {
        const double t = std::exp(-s);
        return t * (f(t) + f(-t));
    };
    std::vector<double> seeds;
    for (double s = s0 + 5.0; s < s1; s += 5.0)
        seeds.push_back(s);
    QuadResult out = adaptive_integral(mapped, s0, s1, abs_tol, seeds);
    // Charge the truncated exponential tail: the image decays like
    // e^{-s} poly(s), so a few multiples of the endpoint value cover it.
    const double edge = std::abs(mapped(s1));
    out.tail_bound = 4.0 * edge;
    out.error += out.tail_bound;
    return out;
}

QuadResult oscillatory_paired(const ComplexFn& g, double M, double t_hi,
                              int phase_sign, RealFn sup_bound, double stop_tol)
{
    if (!(M > 0.0))
        throw std::invalid_argument("oscillatory_paired: M must be > 0");
    if (phase_sign != 1 && phase_sign != -1)
        throw std::invalid_argument("oscillatory_paired: phase_sign must be +-1");
    const double sigma_hi = t_hi * M;
    if (!(sigma_hi > pi))
        throw std::invalid_argument("oscillatory_paired: need t_hi > pi/M");

    const double ps = static_cast<double>(phase_sign);
    auto G = [&](double sigma) { return g(sigma / M); };
    auto phase = [ps](double sigma) {
        return std::complex<double>(std::cos(sigma), ps * std::sin(sigma));
    };

    const std::size_t K =
        static_cast<std::size_t>(std::floor((sigma_hi - pi) / (2.0 * pi)));

    QuadResult out;
    std::complex<double> sum = 0.0;
    double err = 0.0;
    std::vector<double> envelope;
    envelope.reserve(K);
    std::size_t done = 0;

    for (std::size_t k = 1; k <= K; ++k) {
        const double lo = (2.0 * static_cast<double>(k) - 1.0) * pi;
        ComplexFn paired = [&](double sigma) {
            return phase(sigma) * (G(sigma) - G(sigma + pi));
        };
        QuadResult blk = gk_panel(paired, lo, lo + pi);
        sum += blk.value;
        err += blk.error;
        out.evaluations += 2 * blk.evaluations;
        const double kk = static_cast<double>(k);
        const double ek = std::abs(blk.value) * kk * kk;
        envelope.push_back(ek);
        out.envelope_max = std::max(out.envelope_max, ek);
        if (k <= 10)
            out.envelope_head = std::max(out.envelope_head, ek);
        done = k;
        if (sup_bound && stop_tol > 0.0 && (k % 16 == 0)) {
            const double t_here = (lo + 2.0 * pi) / M;
            const double rem = (t_hi - t_here) * sup_bound(t_here);
            if (rem <= stop_tol) {
                out.tail_bound = rem;
                break;
            }
        }
    }
    if (out.tail_bound == 0.0 && done == K) {
        // Remainder shorter than one period past the last full block.
        const double lo = (2.0 * static_cast<double>(K) + 1.0) * pi;
        if (sigma_hi > lo) {
            ComplexFn rem_f = [&](double sigma) {
                return phase(sigma) * G(sigma);
            };
            const double mid = 0.5 * (lo + sigma_hi);
            QuadResult r1 = gk_panel(rem_f, lo, mid);
            QuadResult r2 = gk_panel(rem_f, mid, sigma_hi);
            sum += r1.value + r2.value;
            err += r1.error + r2.error;
            out.evaluations += r1.evaluations + r2.evaluations;
        }
    }
    out.blocks = done;
    out.value = sum / M;
    out.error = err / M + out.tail_bound;
    if (!envelope.empty()) {
        std::vector<double> tmp = envelope;
        const std::size_t mididx = tmp.size() / 2;
        std::nth_element(tmp.begin(), tmp.begin() + mididx, tmp.end());
        out.envelope_median = tmp[mididx];
    }
    return out;
}

QuadResult oscillatory_log_integral(const OscillandSpec& spec)
{
    if (spec.r < 0 || spec.m < 0)
        throw std::invalid_argument("oscillatory_log_integral: r, m must be >= 0");
    const int r = spec.r;
    const int m = spec.m;
    ComplexFn g = [&spec, r, m](double t) -> std::complex<double> {
        double factor = 1.0 / t;
        if (r > 0) {
            const double lt = std::log(t);
            for (int i = 0; i < r; ++i)
                factor *= lt;
        }
        if (spec.window)
            factor *= spec.window(t);
        std::complex<double> out = factor;
        if (m > 0 && spec.cf)
            out *= cpow_int(spec.cf(t), static_cast<std::uint64_t>(m));
        return out;
    };
    return oscillatory_paired(g, spec.M, spec.upper, -1);
}

std::complex<double> cpow_int(std::complex<double> z, std::uint64_t m)
{
    std::complex<double> acc = 1.0;
    while (m) {
        if (m & 1u)
            acc *= z;
        z *= z;
        m >>= 1;
    }
    return acc;
}

} // namespace heavytail
