#include "heavytail/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "heavytail/quadrature.hpp"

namespace heavytail {

namespace {

constexpr double pi = 3.141592653589793238462643383279503;
constexpr double two_pi = 2.0 * pi;

// Suffix maximum of a sampled nonnegative function on [0, upper]; used to
// build conservative sup bounds for the early-stop logic.  pad absorbs the
// variation between grid points.
class SuffixScan {
public:
    SuffixScan(const RealFn& f, double upper, std::size_t points, double pad)
        : upper_(upper), pad_(pad)
    {
        step_ = upper / static_cast<double>(points - 1);
        suffix_.resize(points);
        double running = 0.0;
        for (std::size_t i = points; i-- > 0;) {
            const double t = step_ * static_cast<double>(i);
            running = std::max(running, std::abs(f(t)));
            suffix_[i] = running;
        }
    }

    double sup(double t) const
    {
        if (t <= 0.0)
            return suffix_.front() + pad_;
        if (t >= upper_)
            return suffix_.back() + pad_;
        const std::size_t idx = static_cast<std::size_t>(t / step_);
        return suffix_[std::min(idx, suffix_.size() - 1)] + pad_;
    }

private:
    double upper_;
    double step_;
    double pad_;
    std::vector<double> suffix_;
};

// Shared per-call state: the model, the smoother, and scanned envelopes of
// |Psi|, psi_Y and |psi_Y'| for tail-stopping bounds.
struct Ctx {
    const TailModel& model;
    const SmootherSpec& smo;
    double eps;
    CfAbsEnvelope cf_env;
    SuffixScan win_env;
    SuffixScan win_d1_env;

    Ctx(const TailModel& m, const SmootherSpec& s)
        : model(m), smo(s), eps(s.epsilon),
          cf_env(m, s.epsilon, 8192),
          win_env([&s](double t) { return smoother_jet(s, t).value; },
                  s.epsilon, 2048, 1e-3),
          win_d1_env([&s](double t) { return smoother_jet(s, t).d1; },
                     s.epsilon, 2048, 1e-2)
    {
    }

    double cf_pow_bound(double t, std::uint64_t n) const
    {
        const double base = std::min(1.0, cf_env.suffix_max(t) + 2e-3);
        return std::pow(base, static_cast<double>(n));
    }

    // |Theta(t)| <= |p-q| (1 + |Ci|) + pi/2 + 1 with |Ci| <= |ln t| + 1 for
    // t <= 1; monotone nonincreasing in t on (0, 1).
    double theta_bound(double t) const
    {
        const double c = std::abs(model.p - model.q);
        return c * (2.0 - std::log(t)) + 2.6;
    }

    // |Psi'(t)| <= pi/2 + |p-q| |Ci(t)|.
    double cf_d1_bound(double t) const
    {
        const double c = std::abs(model.p - model.q);
        return pi / 2.0 + c * (1.0 - std::log(t));
    }

    // |F(t,n)| <= (n-1) + s/(1-s) with s an upper bound for |Psi| past t.
    double F_bound(double t, std::uint64_t n) const
    {
        const double s = std::min(1.0 - 1e-12, cf_env.suffix_max(t) + 2e-3);
        const double nn = static_cast<double>(n);
        return (nn - 1.0) + std::min(nn - 1.0, s / (1.0 - s));
    }

    // |F'(t,n)| <= |Psi'| min(n^2/2, 1/(1-s)^2).
    double F_d1_bound(double t, std::uint64_t n) const
    {
        const double s = std::min(1.0 - 1e-12, cf_env.suffix_max(t) + 2e-3);
        const double nn = static_cast<double>(n);
        const double geo = 1.0 / ((1.0 - s) * (1.0 - s));
        return cf_d1_bound(t) * std::min(0.5 * nn * nn, geo);
    }
};

struct LineResult {
    std::complex<double> raw = 0.0;
    double error = 0.0;
    std::size_t blocks = 0;
    std::size_t evaluations = 0;
};

// int_{-eps}^{eps} e^{-itM} G(t) dt for a G that may carry an integrable
// log singularity at the origin: log-substituted inner window on
// [-pi/M, pi/M], half-period-paired oscillatory blocks outside it, with the
// negative half-axis folded onto [pi/M, eps] through t -> -t (which flips
// the phase sign).
LineResult full_line_integral(const Ctx& ctx, const ComplexFn& G, double M,
                              double inner_tol, const RealFn& sup_bound,
                              double stop_tol)
{
    LineResult out;
    ComplexFn inner = [&G, M](double t) {
        const double s = t * M;
        return std::complex<double>(std::cos(s), -std::sin(s)) * G(t);
    };
    QuadResult in = inner_window_integral(inner, M, inner_tol);
    out.raw += in.value;
    out.error += in.error;
    out.evaluations += in.evaluations;

    if (ctx.eps * M > pi * (1.0 + 1e-12)) {
        QuadResult pos = oscillatory_paired(G, M, ctx.eps, -1, sup_bound,
                                            stop_tol);
        ComplexFn G_neg = [&G](double t) { return G(-t); };
        QuadResult neg = oscillatory_paired(G_neg, M, ctx.eps, +1, sup_bound,
                                            stop_tol);
        out.raw += pos.value + neg.value;
        out.error += pos.error + neg.error;
        out.blocks = pos.blocks + neg.blocks;
        out.evaluations += pos.evaluations + neg.evaluations;
    }
    return out;
}

// Enforce conjugate symmetry: the line integral of a conjugate-symmetric
// integrand is real (or purely imaginary when want_imag is set).  The
// leftover off-component must be explained by the quadrature error; a
// violation beyond that means broken symmetry bookkeeping, which is a bug,
// not noise.
double take_symmetric_part(const LineResult& lr, bool want_imag,
                           double* residual_out)
{
    const double keep = want_imag ? lr.raw.imag() : lr.raw.real();
    const double off = want_imag ? lr.raw.real() : lr.raw.imag();
    const double scale = std::abs(keep) + lr.error + 1e-300;
    const double residual = std::abs(off) / scale;
    if (residual_out)
        *residual_out = std::max(*residual_out, residual);
    if (std::abs(off) > 1e-10 * std::abs(keep) + 10.0 * lr.error + 1e-25)
        throw std::runtime_error(
            "inversion: conjugate-symmetry residual exceeds the quadrature "
            "error estimate");
    return keep;
}

struct GpTail {
    double value = 0.0;
    double error = 0.0;
    std::size_t blocks = 0;
    std::size_t evaluations = 0;
};

// One-sided smoothed inversion at the point x:
//     P(S_n + Y > x) = 1/2 + (1/pi) int_0^eps Im[e^{-itx} psi_Y Psi^n]/t dt.
// The integrand is even in t, so the inner window integral over [-h, h]
// equals twice the [0, h] piece.
GpTail gp_upper_tail(const Ctx& ctx, std::uint64_t n, double x)
{
    auto phi = [&ctx, n](double t) {
        return smoother_jet(ctx.smo, t).value *
               cpow_int(psi_exact(ctx.model, t).value, n);
    };
    GpTail out;

    ComplexFn inner = [&phi, x](double t) {
        const double s = t * x;
        const std::complex<double> val =
            std::complex<double>(std::cos(s), -std::sin(s)) * phi(t);
        return std::complex<double>(val.imag() / t, 0.0);
    };
    const double h = pi / x;
    const double probe =
        std::abs(inner(0.49 * h)) + std::abs(inner(0.051 * h));
    const double inner_tol = 1e-12 + 1e-12 * probe * 2.0 * h;
    QuadResult in = inner_window_integral(inner, x, inner_tol);
    double acc = 0.5 * in.value.real();
    double err = 0.5 * in.error;
    out.evaluations += in.evaluations;

    if (ctx.eps * x > pi * (1.0 + 1e-12)) {
        ComplexFn g = [&phi](double t) { return phi(t) / t; };
        RealFn sup = [&ctx, n](double t) {
            return ctx.win_env.sup(t) * ctx.cf_pow_bound(t, n) / t;
        };
        const double stop_tol = 1e-9 * static_cast<double>(n) / x;
        QuadResult o = oscillatory_paired(g, x, ctx.eps, -1, sup, stop_tol);
        acc += o.value.imag();
        err += o.error;
        out.blocks = o.blocks;
        out.evaluations += o.evaluations;
    }
    out.value = 0.5 + acc / pi;
    out.error = err / pi;
    return out;
}

} // namespace

TailEstimate smoothed_tail_prob(const TailModel& model,
                                const SmootherSpec& smoother,
                                std::uint64_t n, double N, double g,
                                FarMode far)
{
    if (n < 1)
        throw std::invalid_argument("smoothed_tail_prob: n must be >= 1");
    if (!(N > 0.0))
        throw std::invalid_argument("smoothed_tail_prob: N must be > 0");
    if (!(g >= N * N * (1.0 - 1e-12)))
        throw std::invalid_argument(
            "smoothed_tail_prob: need g >= N^2 so the far endpoint stays a "
            "lower-order term");
    Ctx ctx(model, smoother);

    TailEstimate out;
    const double a = smoother.a_budget;
    out.budget.z_N = std::pow(N, 2.0 / a);
    out.budget.y_N = std::pow(N, 2.0 / a - 2.0);
    out.budget.smoother_tail = smoother_tail_budget(smoother, out.budget.z_N);
    out.budget.smoothing_term = static_cast<double>(n) * out.budget.y_N;
    out.budget.budget_ok =
        out.budget.z_N < 0.1 * N &&
        out.budget.smoother_tail < 0.1 * out.budget.y_N;

    GpTail near = gp_upper_tail(ctx, n, N);
    out.blocks = near.blocks;
    out.evaluations = near.evaluations;
    if (far == FarMode::budgeted) {
        // P(S_n + Y > N+g) <= P(S_n > (N+g)/2) + P(Y > (N+g)/2); the first
        // factor is crude (largest-summand union bound) but cheap and safe.
        const double far_point = N + g;
        out.budget.far_term =
            2.0 * static_cast<double>(n) * static_cast<double>(n) / far_point +
            smoother_tail_budget(smoother, 0.5 * far_point);
        out.value = near.value;
        out.budget.quad_error = near.error;
    } else {
        GpTail farv = gp_upper_tail(ctx, n, N + g);
        out.value = near.value - farv.value;
        out.budget.far_term = 0.0;
        out.budget.quad_error = near.error + farv.error;
        out.blocks += farv.blocks;
        out.evaluations += farv.evaluations;
    }
    return out;
}

IDecomposition i_decomposition(const TailModel& model,
                               const SmootherSpec& smoother,
                               std::uint64_t n, double N)
{
    if (n < 1)
        throw std::invalid_argument("i_decomposition: n must be >= 1");
    if (!(N > 0.0))
        throw std::invalid_argument("i_decomposition: N must be > 0");
    Ctx ctx(model, smoother);
    const double nn = static_cast<double>(n);
    const double lnN = std::log(N);
    const double stop_tol = std::max(1e-7 * nn * nn / (N * N), 1e-30);
    const double inner_tol = std::max(1e-6 * nn * nn / (N * N), 1e-18);

    IDecomposition out;

    // I(N): integrand Theta psi_Y F.
    ComplexFn G0 = [&](double t) {
        return theta_jet(model, t).value * smoother_jet(smoother, t).value *
               F_jet(model, t, n).value;
    };
    RealFn sup0 = [&ctx, n](double t) {
        return ctx.theta_bound(t) * ctx.win_env.sup(t) * ctx.F_bound(t, n);
    };
    LineResult l0 = full_line_integral(ctx, G0, N, inner_tol, sup0, stop_tol);
    out.I_near = take_symmetric_part(l0, false, &out.realness_residual) /
                 two_pi;
    out.blocks += l0.blocks;
    double err = l0.error / two_pi;

    // I1: Theta psi_Y' F, I2: Theta' psi_Y F, I3: Theta psi_Y F'; all get
    // divided by 2 pi i N, so the symmetric part is the imaginary one.
    ComplexFn G1 = [&](double t) {
        return theta_jet(model, t).value * smoother_jet(smoother, t).d1 *
               F_jet(model, t, n).value;
    };
    RealFn sup1 = [&ctx, n](double t) {
        return ctx.theta_bound(t) * ctx.win_d1_env.sup(t) * ctx.F_bound(t, n);
    };
    LineResult l1 = full_line_integral(ctx, G1, N, inner_tol * N, sup1,
                                       stop_tol * N);
    out.I1 = take_symmetric_part(l1, true, &out.realness_residual) /
             (two_pi * N);
    out.blocks += l1.blocks;
    err += l1.error / (two_pi * N);

    ComplexFn G2 = [&](double t) {
        return theta_jet(model, t).d1 * smoother_jet(smoother, t).value *
               F_jet(model, t, n).value;
    };
    RealFn sup2 = [&ctx, n](double t) {
        // |Theta'(t)| <= |p-q|/t + 1/2.
        const double c = std::abs(ctx.model.p - ctx.model.q);
        return (c / t + 0.5) * ctx.win_env.sup(t) * ctx.F_bound(t, n);
    };
    LineResult l2 = full_line_integral(ctx, G2, N, inner_tol * N, sup2,
                                       stop_tol * N);
    out.I2 = take_symmetric_part(l2, true, &out.realness_residual) /
             (two_pi * N);
    out.blocks += l2.blocks;
    err += l2.error / (two_pi * N);

    ComplexFn G3 = [&](double t) {
        return theta_jet(model, t).value * smoother_jet(smoother, t).value *
               F_jet(model, t, n).d1;
    };
    RealFn sup3 = [&ctx, n](double t) {
        return ctx.theta_bound(t) * ctx.win_env.sup(t) * ctx.F_d1_bound(t, n);
    };
    LineResult l3 = full_line_integral(ctx, G3, N, inner_tol * N, sup3,
                                       stop_tol * N);
    out.I3 = take_symmetric_part(l3, true, &out.realness_residual) /
             (two_pi * N);
    out.blocks += l3.blocks;
    err += l3.error / (two_pi * N);

    out.quad_error = err;
    out.identity_gap = std::abs(out.I1 + out.I2 + out.I3 - out.I_near);
    const double base = nn * nn / (N * N);
    out.ratio1 = std::abs(out.I1) / base;
    out.ratio2 = std::abs(out.I2) / (base * lnN);
    out.ratio3 = std::abs(out.I3) / (base * lnN * lnN);
    return out;
}

DeviationResult deviation_delta(const TailModel& model,
                                const SmootherSpec& smoother,
                                std::uint64_t n, double N, double g,
                                FarMode far)
{
    const Norming nrm = norming(model, n);
    if (!(N > nrm.b_n))
        throw std::domain_error(
            "deviation_delta: N must exceed the norming level b_n; inside "
            "the typical range the excess is not a deviation quantity");
    DeviationResult out;
    out.Sn = smoothed_tail_prob(model, smoother, n, N, g, far);
    out.P_X1 = model.tail_prob(Side::upper, N);
    out.P_Sn = out.Sn.value;
    out.delta = out.P_Sn - static_cast<double>(n) * out.P_X1;
    return out;
}

} // namespace heavytail
