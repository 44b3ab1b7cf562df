#ifndef HEAVYTAIL_SMOOTHER_HPP
#define HEAVYTAIL_SMOOTHER_HPP

namespace heavytail {

// Centered cardinal B-spline M_m(u) of order m on [0, m], the m-fold
// convolution of the unit box, via the standard alternating sum
//     M_m(u) = 1/(m-1)! sum_{j=0}^{floor(u)} (-1)^j binom(m,j) (u-j)^{m-1}.
// deriv in {0,1,2} selects M_m, M_m' or M_m''.
double cardinal_bspline(int m, double u, int deriv = 0);

// Smoothing window in frequency space: psi_Y(t) is the k-fold convolution of
// triangle windows of half-width eps/k, i.e. an order-2k cardinal B-spline
// rescaled to [-eps, eps] with psi_Y(0) = 1.  It is C^{2k-2}, vanishes with
// all derivatives up to order 2k-2 at +-eps, and is the characteristic
// function of a random variable Y with density
//     f_Y(x) = f_a(x)^k / Z,   f_a(x) = (1 - cos(a x)) / (pi a x^2),
// where a = eps/k and Z normalizes the mass to one.
//
// The exponent 'a_budget' in (2, 2k-1) is the power used by callers to pick
// acceptance thresholds z_N = N^{2/a_budget}; it is stored here so the
// constructor can enforce that the tail bound below actually beats it.
//
// tail_constant K gives the rigorous bound P(|Y| > z) <= K / z^{2k-2} for
// every z > 0: with B = (2/Z) (2/(pi a))^k / (2k-1) the raw tail integral
// gives B / z^{2k-1}, and K = B^{(2k-2)/(2k-1)} makes the weaker power valid
// globally because K/z^{2k-2} >= 1 wherever the raw bound is loose.
struct SmootherSpec {
    double epsilon;
    int k;
    double a_budget;
    double tri_halfwidth;   // eps/k
    double center_norm;     // M_2k(k), the peak of the unscaled spline
    double density_norm;    // Z
    double tail_constant;   // K

    SmootherSpec(double epsilon, int k, double a_budget);
};

struct SmootherJet {
    double value;
    double d1;
    double d2;
};

// psi_Y and two derivatives; identically zero outside [-eps, eps].
SmootherJet smoother_jet(const SmootherSpec& spec, double t);

// Density of Y at x.
double smoother_density(const SmootherSpec& spec, double x);

// The bound K / z^{2k-2} on P(|Y| > z); exceeds one (trivially true) for
// small z.  Throws for z <= 0.
double smoother_tail_budget(const SmootherSpec& spec, double z);

} // namespace heavytail

#endif
