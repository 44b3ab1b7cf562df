#ifndef HEAVYTAIL_QUADRATURE_HPP
#define HEAVYTAIL_QUADRATURE_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace heavytail {

using ComplexFn = std::function<std::complex<double>(double)>;
using RealFn = std::function<double(double)>;

struct QuadResult {
    std::complex<double> value = 0.0;
    double error = 0.0;            // absolute error estimate
    std::size_t evaluations = 0;
    std::size_t blocks = 0;        // half-period pairs (oscillatory engine)
    double tail_bound = 0.0;       // bound on a remainder left unintegrated
    // Decay diagnostics for the paired oscillatory engine: |J_k| k^2 over
    // the first ten blocks, over all blocks, and its median.
    double envelope_head = 0.0;
    double envelope_max = 0.0;
    double envelope_median = 0.0;
};

// One Gauss-Kronrod 7-15 panel on [a, b]; the error field is the
// conservative |K15 - G7| difference.
QuadResult gk_panel(const ComplexFn& f, double a, double b);

// Globally adaptive bisection built on gk_panel.  Splits the worst panel
// until the summed error estimate drops below abs_tol; throws
// std::runtime_error if max_panels panels cannot achieve that.  Optional
// breakpoints seed the initial subdivision (integrand kinks, lobe edges).
QuadResult adaptive_integral(const ComplexFn& f, double a, double b,
                             double abs_tol,
                             const std::vector<double>& breakpoints = {},
                             std::size_t max_panels = 4000);

// Integral of f over the symmetric window [-pi/M, pi/M] around the origin,
// tolerant of integrands with (ln t)^r-type singular derivatives at 0.  The
// substitution t = +-e^{-s} maps both half-windows onto [ln(M/pi), inf);
// the exponentially damped image is integrated adaptively and the truncated
// tail is charged to the error estimate.
QuadResult inner_window_integral(const ComplexFn& f, double M, double abs_tol);

// Integral of e^{i phase_sign t M} g(t) over [pi/M, t_hi] by half-period
// pairing in the phase variable sigma = t M: blocks
//     J_k = int_{(2k-1)pi}^{2k pi} e^{is} [G(s) - G(s+pi)] ds,  G(s) = g(s/M),
// each handled by a single G7K15 panel, plus a direct remainder shorter than
// one period.  For g with bounded variation the |J_k| decay like k^{-2},
// which the envelope fields in the result expose.
//
// If sup_bound is provided it must return an upper bound for |g| on [t, t_hi];
// integration then stops early once (remaining length) * bound <= stop_tol,
// charging that product to tail_bound and the error estimate.
QuadResult oscillatory_paired(const ComplexFn& g, double M, double t_hi,
                              int phase_sign = -1,
                              RealFn sup_bound = nullptr,
                              double stop_tol = 0.0);

// The log-oscillatory family
//     int_{pi/M}^{upper} e^{-itM} t^{-1} (ln t)^r window(t) cf(t)^m dt
// evaluated through oscillatory_paired.  Null window or cf mean the constant
// one; r >= 0 and m >= 0.
struct OscillandSpec {
    double M;
    int r = 0;
    int m = 0;
    double upper;
    RealFn window = nullptr;
    ComplexFn cf = nullptr;
};

QuadResult oscillatory_log_integral(const OscillandSpec& spec);

// Integer power of a complex number by binary exponentiation (m >= 0).
std::complex<double> cpow_int(std::complex<double> z, std::uint64_t m);

} // namespace heavytail

#endif
