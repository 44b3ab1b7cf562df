#ifndef HEAVYTAIL_SPECIAL_HPP
#define HEAVYTAIL_SPECIAL_HPP

namespace heavytail {

// Euler-Mascheroni constant, to full double precision.
inline constexpr double euler_gamma = 0.577215664901532860606512090082;

// Sine integral Si(x) = int_0^x sin(t)/t dt.  Valid for all real x (odd in x).
// Relative accuracy is better than 1e-15 for |x| <= 4 and about 1e-16 for
// |x| > 4 via the asymptotic auxiliary functions.
double sine_integral(double x);

// Cosine integral Ci(x) = gamma + ln(x) + int_0^x (cos(t)-1)/t dt.
// Defined for x > 0; throws std::domain_error otherwise.
double cosine_integral(double x);

struct SiCi {
    double si;
    double ci;
};

// Both integrals at one x > 0, sharing the sin/cos evaluations.
// Throws std::domain_error for x <= 0.
SiCi sin_cos_integrals(double x);

} // namespace heavytail

#endif
