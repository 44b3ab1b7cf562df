#ifndef HEAVYTAIL_MODEL_HPP
#define HEAVYTAIL_MODEL_HPP

#include <cstdint>

namespace heavytail {

enum class Side { upper, lower };

// Two-sided heavy-tail model.  For x >= x0 the tails are
//     P(X > x)  = p/x + c1p/x^2,
//     P(X < -x) = q/x + c1m/x^2,        q = 1 - p,
// and the remaining interior mass is spread uniformly over [-x0, x0].
// The canonical member of the family has x0 = 1 and c1p = c1m = 0, in which
// case the interior carries no mass at all and the density is p/x^2 to the
// right and q/x^2 to the left.
//
// The constructor rejects parameters that would make the density negative
// somewhere or leave negative mass in the interior.
struct TailModel {
    double p;
    double q;
    double x0;
    double c1p;
    double c1m;
    double interior_mass;   // 1 - P(X > x0) - P(X < -x0)
    double slab_density;    // interior_mass / (2 x0)

    explicit TailModel(double p_, double x0_ = 1.0,
                       double c1p_ = 0.0, double c1m_ = 0.0);

    bool canonical() const {
        return x0 == 1.0 && c1p == 0.0 && c1m == 0.0;
    }

    // Tail probability in the tail region x >= x0 (throws outside it).
    double tail_prob(Side side, double x) const;

    // P(X > x) for arbitrary real x, covering the interior and the far
    // negative range as well.
    double tail_prob_upper_extended(double x) const;

    double density(double x) const;
    double cdf(double x) const;

    // Inverse of the cdf on (0,1).  For the canonical model this is
    // -q/u for u < q and p/(1-u) for u >= q.
    double quantile(double u) const;

    // E[X 1{|X| <= a}] for a >= x0.  The interior contributes nothing by
    // symmetry; the tails give (p-q) ln(a/x0) + 2 (c1p-c1m)(1/x0 - 1/a).
    double truncated_mean(double a) const;
};

// Norming sequence for the partial sums S_n: a_n = n and
// b_n = n * E[X 1{|X| <= n}], which for the canonical model is (p-q) n ln n.
struct Norming {
    double a_n;
    double b_n;
};

Norming norming(const TailModel& model, std::uint64_t n);

} // namespace heavytail

#endif
