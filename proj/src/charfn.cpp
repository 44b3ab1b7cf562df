#include "heavytail/charfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "heavytail/special.hpp"

namespace heavytail {

namespace {

constexpr double pi_half = 1.5707963267948966;
const double nan_d = std::numeric_limits<double>::quiet_NaN();

void require_canonical(const TailModel& model, const char* who)
{
    if (!model.canonical())
        throw std::domain_error(std::string(who) +
                                ": closed form requires the canonical model");
}

// Jet of Psi at t > 0; callers handle the reflection to t < 0.
CharFnJet psi_positive(double c, double t)
{
    const SiCi sc = sin_cos_integrals(t);
    const double st = std::sin(t);
    const double ct = std::cos(t);
    CharFnJet out;
    out.value = {ct - t * (pi_half - sc.si), c * (st - t * sc.ci)};
    out.d1 = {sc.si - pi_half, -c * sc.ci};
    out.d2 = {st / t, -c * ct / t};
    return out;
}

} // namespace

CharFnJet psi_exact(const TailModel& model, double t)
{
    require_canonical(model, "psi_exact");
    const double c = model.p - model.q;
    if (t == 0.0) {
        // Psi(0) = 1; the derivatives blow up like ln|t| at the origin.
        CharFnJet out;
        out.value = 1.0;
        out.d1 = {nan_d, nan_d};
        out.d2 = {nan_d, nan_d};
        out.derivs_singular = true;
        return out;
    }
    if (t > 0.0)
        return psi_positive(c, t);
    CharFnJet pos = psi_positive(c, -t);
    CharFnJet out;
    out.value = std::conj(pos.value);
    out.d1 = -std::conj(pos.d1);
    out.d2 = std::conj(pos.d2);
    return out;
}

CharFnJet theta_jet(const TailModel& model, double t)
{
    require_canonical(model, "theta_jet");
    if (t == 0.0)
        throw std::domain_error("theta_jet: log singularity at t = 0");
    const double c = model.p - model.q;
    const double s = std::abs(t);
    const SiCi sc = sin_cos_integrals(s);
    const double ss = std::sin(s);
    const double cs = std::cos(s);
    const double half = std::sin(0.5 * s);
    const double one_minus_cos = 2.0 * half * half;

    CharFnJet out;
    out.value = {c * (ss / s - sc.ci), (pi_half - sc.si) + one_minus_cos / s};
    out.d1 = {-c * ss / (s * s), -one_minus_cos / (s * s)};
    const double re_d2 = c * (2.0 * ss - s * cs) / (s * s * s);
    double im_d2;
    if (s < 0.1) {
        // (2(1-cos s) - s sin s)/s^3 loses ~all digits below s ~ 1e-4;
        // the series s/12 - s^3/180 + s^5/6720 is good to 1e-18 here.
        const double s2 = s * s;
        im_d2 = s * (1.0 / 12.0 + s2 * (-1.0 / 180.0 + s2 / 6720.0));
    } else {
        im_d2 = (2.0 * one_minus_cos - s * ss) / (s * s * s);
    }
    out.d2 = {re_d2, im_d2};
    if (t < 0.0) {
        out.value = std::conj(out.value);
        out.d1 = -std::conj(out.d1);
        out.d2 = std::conj(out.d2);
    }
    return out;
}

FJet F_jet(const TailModel& model, double t, std::uint64_t n)
{
    if (n < 1)
        throw std::invalid_argument("F_jet: n must be >= 1");
    const CharFnJet psi = psi_exact(model, t);
    FJet out;
    if (n == 1) {
        out.value = 0.0;
        out.d1 = 0.0;
        return out;
    }
    if (psi.derivs_singular) {
        // t = 0: every Psi^k is 1, so F = 0, but F' inherits the singularity.
        out.value = 0.0;
        out.d1 = {nan_d, nan_d};
        out.derivs_singular = true;
        return out;
    }
    const std::complex<double> z = psi.value;
    const std::complex<double> d = z - 1.0;
    const double m = static_cast<double>(n - 1);
    // The geometric numerators cancel to O(|z-1|^2); below |z-1| = 1e-4 the
    // cancellation costs more digits than O(n) direct summation is worth.
    if (std::abs(d) > 1e-4) {
        const std::complex<double> zm = std::pow(z, m);      // z^(n-1)
        const std::complex<double> zn = zm * z;               // z^n
        out.value = z * (zm - 1.0) / d - m;
        out.d1 = psi.d1 * (m * zn - (m + 1.0) * zm + 1.0) / (d * d);
    } else {
        std::complex<double> zk = 1.0;        // z^k, starting at k = 0
        std::complex<double> sum = 0.0;       // sum of z^k - 1
        std::complex<double> slope = 0.0;     // sum of k z^(k-1)
        for (std::uint64_t k = 1; k < n; ++k) {
            slope += static_cast<double>(k) * zk;
            zk *= z;
            sum += zk - 1.0;
        }
        out.value = sum;
        out.d1 = psi.d1 * slope;
    }
    return out;
}

double decomposition_residual(std::complex<double> z, std::uint64_t n)
{
    if (n < 1)
        throw std::invalid_argument("decomposition_residual: n must be >= 1");
    std::complex<double> zk = z;            // z^k
    std::complex<double> sum = 0.0;         // direct sum of z^k - 1
    for (std::uint64_t k = 1; k < n; ++k) {
        sum += zk - 1.0;
        zk *= z;
    }
    // zk now holds z^n.
    const std::complex<double> lhs = zk - static_cast<double>(n) * z;
    const std::complex<double> rhs =
        (z - 1.0) * sum - static_cast<double>(n - 1);
    return std::abs(lhs - rhs);
}

namespace {

// Least squares for a 3-column design via modified Gram-Schmidt in long
// double.  Columns are scaled to unit max first; tiny grids keep this well
// conditioned.
void lstsq3(const std::vector<std::array<double, 3>>& X,
            const std::vector<double>& y, double out[3])
{
    const std::size_t nrow = X.size();
    if (nrow < 3 || nrow > 256)
        throw std::invalid_argument("lstsq3: needs between 3 and 256 rows");
    long double col[3][256];
    long double rhs[256];
    long double scale[3];
    for (int j = 0; j < 3; ++j) {
        long double mx = 0.0L;
        for (std::size_t i = 0; i < nrow; ++i)
            mx = std::max(mx, (long double)std::abs(X[i][j]));
        scale[j] = (mx > 0.0L) ? mx : 1.0L;
        for (std::size_t i = 0; i < nrow; ++i)
            col[j][i] = X[i][j] / scale[j];
    }
    for (std::size_t i = 0; i < nrow; ++i)
        rhs[i] = y[i];

    long double R[3][3] = {};
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < j; ++k) {
            long double dot = 0.0L;
            for (std::size_t i = 0; i < nrow; ++i)
                dot += col[k][i] * col[j][i];
            R[k][j] = dot;
            for (std::size_t i = 0; i < nrow; ++i)
                col[j][i] -= dot * col[k][i];
        }
        long double nrm = 0.0L;
        for (std::size_t i = 0; i < nrow; ++i)
            nrm += col[j][i] * col[j][i];
        nrm = std::sqrt(nrm);
        R[j][j] = nrm;
        for (std::size_t i = 0; i < nrow; ++i)
            col[j][i] /= nrm;
    }
    long double qty[3];
    for (int j = 0; j < 3; ++j) {
        long double dot = 0.0L;
        for (std::size_t i = 0; i < nrow; ++i)
            dot += col[j][i] * rhs[i];
        qty[j] = dot;
    }
    long double beta[3];
    for (int j = 2; j >= 0; --j) {
        long double v = qty[j];
        for (int k = j + 1; k < 3; ++k)
            v -= R[j][k] * beta[k];
        beta[j] = v / R[j][j];
    }
    for (int j = 0; j < 3; ++j)
        out[j] = static_cast<double>(beta[j] / scale[j]);
}

} // namespace

ExpansionCoeffs expansion_coeffs(const TailModel& model)
{
    require_canonical(model, "expansion_coeffs");
    const double c = model.p - model.q;
    ExpansionCoeffs out;
    out.c = c;
    out.C0 = c * (1.0 - euler_gamma);
    out.C = -pi_half;

    constexpr int npts = 200;
    std::vector<std::array<double, 3>> Xre(npts), Xim(npts);
    std::vector<double> yre(npts), yim(npts);
    double residual = 0.0;
    for (int j = 0; j < npts; ++j) {
        const double t = std::pow(10.0, -8.0 + 6.0 * j / (npts - 1.0));
        const CharFnJet psi = psi_exact(model, t);
        const double lt = std::log(t);
        // Dividing through by t turns the fit into an ordinary regression
        // with comparable row weights; without it the tiny-t rows carry no
        // information and the remainder A(t) = t^2/2 + ... biases C at the
        // 1e-3 level.  The t and t^3 (resp. t^2) columns absorb A(t).
        Xre[j] = {1.0, t, t * t * t};
        yre[j] = (psi.value.real() - 1.0) / t;
        Xim[j] = {lt, 1.0, t * t};
        yim[j] = psi.value.imag() / t;

        const std::complex<double> expansion =
            1.0 + std::complex<double>(0.0, 1.0) * (-c * t * lt + out.C0 * t) +
            out.C * t;
        residual = std::max(residual, std::abs(psi.value - expansion) /
                                          (t * t * std::abs(lt)));
    }
    double bre[3], bim[3];
    lstsq3(Xre, yre, bre);
    lstsq3(Xim, yim, bim);
    out.C_fit = bre[0];
    out.c_fit = -bim[0];
    out.C0_fit = bim[1];
    out.residual_bound = residual;
    return out;
}

CfAbsEnvelope::CfAbsEnvelope(const TailModel& model, double upper,
                             std::size_t points)
    : upper_(upper)
{
    if (!(upper > 0.0) || points < 2)
        throw std::invalid_argument("CfAbsEnvelope: bad scan parameters");
    step_ = upper / static_cast<double>(points - 1);
    suffix_.resize(points);
    std::vector<double> vals(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = step_ * static_cast<double>(i);
        vals[i] = (t == 0.0) ? 1.0 : std::abs(psi_exact(model, t).value);
    }
    double running = 0.0;
    for (std::size_t i = points; i-- > 0;) {
        running = std::max(running, vals[i]);
        suffix_[i] = running;
    }
    // |Psi| must drop strictly below 1 away from the origin for the
    // oscillatory tails to converge; catch a broken model early.
    if (suffix_[1] >= 1.0)
        throw std::runtime_error("CfAbsEnvelope: |Psi| not < 1 beyond the origin");
}

double CfAbsEnvelope::suffix_max(double t) const
{
    if (t <= 0.0)
        return suffix_.front();
    if (t >= upper_)
        return suffix_.back();
    // Round down so the reported maximum covers [t, upper] entirely.
    const std::size_t idx = static_cast<std::size_t>(t / step_);
    return suffix_[std::min(idx, suffix_.size() - 1)];
}

} // namespace heavytail
