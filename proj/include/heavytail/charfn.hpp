#ifndef HEAVYTAIL_CHARFN_HPP
#define HEAVYTAIL_CHARFN_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "heavytail/model.hpp"

namespace heavytail {

// Value and first two derivatives of a characteristic-function-like object
// at one point.  When the derivatives do not exist at the requested point
// (the origin, where the log singularity sits) they are set to NaN and
// derivs_singular is raised.
struct CharFnJet {
    std::complex<double> value;
    std::complex<double> d1;
    std::complex<double> d2;
    bool derivs_singular = false;
};

// Closed-form characteristic function Psi(t) = E[e^{itX}] of the canonical
// model, with first and second derivatives.  For t > 0:
//     Re Psi = cos t - t (pi/2 - Si t)
//     Im Psi = (p-q) (sin t - t Ci t)
//     Psi'   = (Si t - pi/2) - i (p-q) Ci t
//     Psi''  = sin t / t - i (p-q) cos t / t
// extended to t < 0 by Psi(-s) = conj Psi(s), Psi'(-s) = -conj Psi'(s),
// Psi''(-s) = conj Psi''(s).  Throws std::domain_error for a non-canonical
// model (no closed form there).
CharFnJet psi_exact(const TailModel& model, double t);

// Theta(t) = (Psi(t) - 1) / (it), the integrated-tail transform, with two
// derivatives.  All three have elementary closed forms; the second
// derivative switches to a short Taylor series near the origin where the
// direct expression loses nearly every digit to cancellation.  Theta itself
// has a log singularity in its real part at t = 0, so t = 0 throws.
CharFnJet theta_jet(const TailModel& model, double t);

// F(t, n) = sum_{k=1}^{n-1} (Psi(t)^k - 1) and its t-derivative
// F'(t, n) = Psi'(t) sum_{k=1}^{n-1} k Psi(t)^{k-1}.  Uses the geometric
// closed forms away from Psi = 1 and direct summation close to it, where
// the closed forms cancel catastrophically.
struct FJet {
    std::complex<double> value;
    std::complex<double> d1;
    bool derivs_singular = false;
};

FJet F_jet(const TailModel& model, double t, std::uint64_t n);

// Residual of the algebraic identity
//     z^n - n z = (z - 1) sum_{k=1}^{n-1} (z^k - 1) - (n - 1)
// evaluated with direct summation.  Exact in exact arithmetic for every
// complex z and n >= 1; the return value measures only rounding.
double decomposition_residual(std::complex<double> z, std::uint64_t n);

// Small-t expansion of Psi around the origin,
//     Psi(t) = 1 - c it ln|t| + C0 it + C |t| + A(t),  t > 0,
// with analytic coefficients c = p-q, C0 = (p-q)(1-gamma), C = -pi/2 and a
// remainder A(t) = t^2/2 + i (p-q) t^3/12 + O(t^4) free of log terms.  The
// *_fit values recover the coefficients by weighted least squares from exact
// Psi values on 200 log-spaced points in [1e-8, 1e-2]; residual_bound is the
// largest |Psi - expansion| / (t^2 |ln t|) seen on that grid.
struct ExpansionCoeffs {
    double c, C0, C;
    double c_fit, C0_fit, C_fit;
    double residual_bound;
};

ExpansionCoeffs expansion_coeffs(const TailModel& model);

// Largest |Psi(s)| over s in [t, upper], from a dense cached scan.  Used to
// bound the tail of oscillatory integrals of Psi^n: the bound is monotone in
// t by construction (a suffix maximum), and the scan verifies |Psi| < 1 away
// from the origin.
class CfAbsEnvelope {
public:
    CfAbsEnvelope(const TailModel& model, double upper, std::size_t points = 4096);
    double suffix_max(double t) const;
    double upper() const { return upper_; }

private:
    double upper_;
    double step_;
    std::vector<double> suffix_;
};

} // namespace heavytail

#endif
