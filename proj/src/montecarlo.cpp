#include "heavytail/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <thread>
#include <vector>

#include "heavytail/quadrature.hpp"

namespace heavytail {

namespace {

constexpr std::uint64_t block_size = 65536;

struct BlockStat {
    double sum = 0.0;
    double sumsq = 0.0;
    std::uint64_t count = 0;
    std::uint64_t hits = 0;
};

// Kahan-compensated accumulator; keeps per-block sums independent of
// anything but the block contents.
struct Kahan {
    double s = 0.0;
    double c = 0.0;
    void add(double x)
    {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

// Run `body(trial)` for every trial, split across workers in fixed blocks;
// combine per-block statistics in block order afterwards so the totals do
// not depend on the worker count.
template <typename Body>
std::vector<BlockStat> run_blocks(std::uint64_t trials, int workers,
                                  const Body& body)
{
    if (workers < 1)
        throw std::invalid_argument("monte carlo: workers must be >= 1");
    const std::uint64_t nblocks = (trials + block_size - 1) / block_size;
    std::vector<BlockStat> stats(nblocks);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::uint64_t b = next.fetch_add(1);
            if (b >= nblocks)
                return;
            const std::uint64_t lo = b * block_size;
            const std::uint64_t hi = std::min(trials, lo + block_size);
            Kahan sum, sumsq;
            std::uint64_t hits = 0;
            for (std::uint64_t trial = lo; trial < hi; ++trial) {
                const double v = body(trial, hits);
                sum.add(v);
                sumsq.add(v * v);
            }
            stats[b].sum = sum.s;
            stats[b].sumsq = sumsq.s;
            stats[b].count = hi - lo;
            stats[b].hits = hits;
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    return stats;
}

McEstimate reduce(const std::vector<BlockStat>& stats, std::uint64_t trials)
{
    long double sum = 0.0L, sumsq = 0.0L;
    std::uint64_t hits = 0;
    for (const BlockStat& b : stats) {
        sum += b.sum;
        sumsq += b.sumsq;
        hits += b.hits;
    }
    McEstimate out;
    out.trials = trials;
    out.hits = hits;
    const long double T = static_cast<long double>(trials);
    const long double mean = sum / T;
    out.estimate = static_cast<double>(mean);
    if (trials > 1) {
        long double var = (sumsq - T * mean * mean) / (T - 1.0L);
        if (var < 0.0L)
            var = 0.0L;
        out.std_error = static_cast<double>(std::sqrt(var / T));
    }
    return out;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key)
{
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k0 += W0;
            k1 += W1;
        }
        const std::uint64_t m0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t m1 = static_cast<std::uint64_t>(M1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(m0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(m0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(m1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(m1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
    }
    return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint32_t stream)
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream)
{
}

double CounterRng::uniform(std::uint64_t trial, std::uint32_t draw) const
{
    const std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(trial),
        static_cast<std::uint32_t>(trial >> 32), draw, stream_};
    const std::array<std::uint32_t, 4> out = philox4x32_10(ctr, key_);
    const std::uint64_t v =
        (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    // 53 high bits, centered in the cell: strictly inside (0, 1).
    return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}

McEstimate naive_tail_estimate(const TailModel& model, std::uint64_t n,
                               double N, std::uint64_t trials,
                               std::uint64_t seed, int workers, bool force,
                               std::uint32_t stream)
{
    if (n < 1)
        throw std::invalid_argument("naive_tail_estimate: n must be >= 1");
    if (trials < 1)
        throw std::invalid_argument("naive_tail_estimate: trials must be >= 1");
    if (n > (1u << 24))
        throw std::invalid_argument("naive_tail_estimate: n too large");
    const double expected_hits =
        static_cast<double>(trials) *
        std::min(1.0, static_cast<double>(n) * model.p / std::max(N, 1.0));
    if (!force && N > static_cast<double>(n) && expected_hits < 10.0)
        throw std::runtime_error(
            "naive_tail_estimate: fewer than 10 expected tail hits at these "
            "(n, N, trials); raise trials or pass force");

    const CounterRng rng(seed, stream);
    auto stats = run_blocks(
        trials, workers,
        [&](std::uint64_t trial, std::uint64_t& hits) -> double {
            double s = 0.0;
            for (std::uint32_t d = 0; d < n; ++d)
                s += model.quantile(rng.uniform(trial, d));
            if (s > N) {
                ++hits;
                return 1.0;
            }
            return 0.0;
        });
    return reduce(stats, trials);
}

McEstimate bigjump_tail_estimate(const TailModel& model, std::uint64_t n,
                                 double N, std::uint64_t trials,
                                 std::uint64_t seed, int workers,
                                 std::uint32_t stream)
{
    if (n < 2)
        throw std::invalid_argument("bigjump_tail_estimate: n must be >= 2");
    if (trials < 1)
        throw std::invalid_argument("bigjump_tail_estimate: trials must be >= 1");
    if (n > (1u << 24))
        throw std::invalid_argument("bigjump_tail_estimate: n too large");

    const CounterRng rng(seed, stream);
    const double nn = static_cast<double>(n);
    const std::uint32_t m = static_cast<std::uint32_t>(n - 1);
    auto stats = run_blocks(
        trials, workers,
        [&](std::uint64_t trial, std::uint64_t& ties) -> double {
            // The estimator conditions on the last coordinate being the
            // unique maximum; an exact floating-point tie among the first
            // n-1 draws would break that bookkeeping, so such trials are
            // redrawn with a fresh draw-index window (expected never).
            for (std::uint32_t attempt = 0;; ++attempt) {
                const std::uint32_t base = attempt * m;
                double sum = 0.0, mx = -1e308;
                bool tie = false;
                for (std::uint32_t d = 0; d < m; ++d) {
                    const double x =
                        model.quantile(rng.uniform(trial, base + d));
                    sum += x;
                    if (x == mx)
                        tie = true;
                    else if (x > mx) {
                        mx = x;
                        tie = false;
                    }
                }
                if (tie && attempt < 64) {
                    ++ties;
                    continue;
                }
                const double barrier = std::max(N - sum, mx);
                return nn * model.tail_prob_upper_extended(barrier);
            }
        });
    McEstimate out = reduce(stats, trials);
    if (model.q > 0.9)
        out.warning = "heavily left-skewed model: big-jump variance gains "
                      "shrink as q -> 1";
    return out;
}

double conv2_tail_prob(const TailModel& model, double N)
{
    if (!model.canonical())
        throw std::domain_error("conv2_tail_prob: canonical model only");
    const double p = model.p, q = model.q;

    // P(S_2 > N) = int f(y) T(N - y) dy with T the extended upper tail.
    // Compactify both tail pieces by y = 1/u (right) and y = -1/u (left);
    // the transformed integrands are p * T(N - 1/u) and q * T(N + 1/u) on
    // (0, 1], bounded and piecewise smooth.  T(x) has kinks at x = +-1,
    // i.e. at u = 1/(N -+ 1) (right piece) and u = 1/(-+1 - N) (left).
    auto right = [&](double u) -> std::complex<double> {
        return p * model.tail_prob_upper_extended(N - 1.0 / u);
    };
    auto left = [&](double u) -> std::complex<double> {
        return q * model.tail_prob_upper_extended(N + 1.0 / u);
    };
    auto kinks = [](std::initializer_list<double> cands) {
        std::vector<double> v;
        for (double c : cands)
            if (c > 0.0 && c < 1.0)
                v.push_back(c);
        return v;
    };
    QuadResult r = adaptive_integral(
        right, 0.0, 1.0, 0.5e-10,
        kinks({1.0 / (N - 1.0), 1.0 / (N + 1.0)}), 20000);
    QuadResult l = adaptive_integral(
        left, 0.0, 1.0, 0.5e-10,
        kinks({1.0 / (1.0 - N), 1.0 / (-1.0 - N)}), 20000);
    return r.value.real() + l.value.real();
}

double conv2_tail_closed(const TailModel& model, double N)
{
    if (!model.canonical())
        throw std::domain_error("conv2_tail_closed: canonical model only");
    if (!(N > 2.0))
        throw std::domain_error("conv2_tail_closed: requires N > 2");
    const double p = model.p, q = model.q;
    const double N2 = N * N;
    const double lnm = std::log(N - 1.0);
    const double lnp = std::log(N + 1.0);
    // Four regions of the convolution integral int f(y) T(N-y) dy:
    //   y in [1, N-1]:       both summands in the upper tail
    //   y in (N-1, N+1):     second summand in the gap, T = p
    //   y in (N+1, inf):     overshoot, T = 1 - q/(y-N)
    //   y in (-inf, -1]:     first summand negative
    const double A =
        p * p * (2.0 * lnm / N2 - 1.0 / (N * (N - 1.0)) + 1.0 / N);
    const double B = p * p * (1.0 / (N - 1.0) - 1.0 / (N + 1.0));
    const double C =
        p / (N + 1.0) - p * q * (lnp / N2 - 1.0 / (N * (N + 1.0)));
    const double D = p * q * (1.0 / N - lnp / N2);
    return A + B + C + D;
}

} // namespace heavytail
