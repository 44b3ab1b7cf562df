#ifndef HEAVYTAIL_MONTECARLO_HPP
#define HEAVYTAIL_MONTECARLO_HPP

#include <array>
#include <cstdint>
#include <string>

#include "heavytail/model.hpp"

namespace heavytail {

// Generator identity recorded in every output that carries estimates, so
// results stay attributable if the generator ever changes.
inline constexpr const char* rng_identity = "philox4x32-10/v1";

// One application of the Philox 4x32 bijection with 10 rounds (standard
// multipliers 0xD2511F53 / 0xCD9E8D57, Weyl constants 0x9E3779B9 /
// 0xBB67AE85).  Pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

// Counter-based uniform stream: draw (trial, index) of stream `stream` under
// a 64-bit seed.  Every variate is a pure function of those four values, so
// any parallel partition of trials reproduces the same numbers.  Returns a
// double strictly inside (0, 1).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t stream);
    double uniform(std::uint64_t trial, std::uint32_t draw) const;

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_;
};

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t hits = 0;        // naive: tail events; bigjump: tie resamples
    std::string warning;
};

// Direct Monte Carlo for P(S_n > N): draw n variates per trial by inverse
// cdf, count exceedances.  Refuses settings with fewer than ~10 expected
// hits (the estimate would be pure noise) unless force is set.  The result
// is independent of the worker count: trials are reduced in fixed blocks of
// 65536 in block order.
McEstimate naive_tail_estimate(const TailModel& model, std::uint64_t n,
                               double N, std::uint64_t trials,
                               std::uint64_t seed, int workers = 1,
                               bool force = false, std::uint32_t stream = 0);

// Conditional single-big-jump estimator: per trial draw X_1..X_{n-1}, with
// S their sum and M their maximum, and output
//     n * P(X > max(N - S, M)),
// the probability that the distinguished last coordinate both beats the
// others and pushes the sum past N.  Unbiased for P(S_n > N) because the
// law is atomless (exact floating-point ties among the drawn maxima are
// resampled and counted; they are expected never).  Variance is far below
// naive once N >> n.  Requires n >= 2.
McEstimate bigjump_tail_estimate(const TailModel& model, std::uint64_t n,
                                 double N, std::uint64_t trials,
                                 std::uint64_t seed, int workers = 1,
                                 std::uint32_t stream = 0);

// Deterministic n = 2 cross-check: P(S_2 > N) by adaptive quadrature of
// int density(y) P(X > N - y) dy with the closed-form extended tail, the
// infinite ranges compactified through y = +-1/u.  Canonical model only;
// any real N.  Absolute accuracy ~1e-10.
double conv2_tail_prob(const TailModel& model, double N);

// Closed form for the same probability (canonical model, N > 2), from
// integrating the convolution piecewise in elementary terms.  Used to
// cross-check conv2_tail_prob with no quadrature in common.
double conv2_tail_closed(const TailModel& model, double N);

} // namespace heavytail

#endif
