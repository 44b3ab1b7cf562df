#ifndef HEAVYTAIL_HARNESS_HPP
#define HEAVYTAIL_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavytail/inversion.hpp"
#include "heavytail/model.hpp"
#include "heavytail/smoother.hpp"

namespace heavytail {

// Thrown for malformed or inconsistent experiment configuration; the CLI
// maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Estimator { bigjump, naive, none };

// Experiment description, normally loaded from a flat key = value file.
// Sections ([model], [grid], ...) are accepted as visual grouping and
// otherwise ignored; keys live in one namespace, unknown or repeated keys
// are errors.  See ExperimentConfig::from_file for the grammar.
struct ExperimentConfig {
    // model (the experiment itself requires the canonical model; the
    // perturbation fields exist so a bad config fails with a clear message)
    double p = 0.7;
    double x0 = 1.0;
    double c1p = 0.0;
    double c1m = 0.0;
    // smoother and error-budget exponent
    double epsilon = 0.5;
    int k = 4;
    double a = 3.0;
    // grid: N = coef * n * (ln n)^N_logpow for each coef in N_coefs, plus
    // an optional out-of-range arm N = linear_coef * n; g = N^g_power
    std::vector<std::uint64_t> n_values{16, 32, 64, 128, 256};
    std::vector<double> N_coefs{20.0, 40.0, 80.0, 160.0};
    int N_logpow = 3;
    bool include_linear_arm = true;
    double linear_coef = 5.0;
    double g_power = 2.0;
    double range_ratio = 0.2;  // in-range means n (ln N)^2 < range_ratio * N
    // Monte Carlo cross-check
    Estimator estimator = Estimator::bigjump;
    std::uint64_t trials = 1000000;
    std::uint64_t seed = 12345;
    bool force_naive = false;
    // execution and output
    int workers = 1;
    FarMode far_mode = FarMode::budgeted;
    std::string out_dir;

    static ExperimentConfig from_file(const std::string& path);

    // Throws ConfigError on out-of-range fields or a grid that violates the
    // cell invariants (N above the norming level b_n, g >= N^2).
    void validate() const;

    TailModel model() const;
    SmootherSpec smoother() const;
};

// One evaluated grid cell.  A cell that threw is kept in place with its
// message in `error` and every derived field left NaN, so one bad cell
// never aborts the grid.
struct CellResult {
    std::uint64_t n = 0;
    double N = 0.0;
    double g = 0.0;
    double P_X1 = 0.0;
    double P_Sn_inv = 0.0;
    double P_Sn_inv_err = 0.0;
    double P_Sn_mc = 0.0;
    double P_Sn_mc_err = 0.0;
    double delta = 0.0;
    double ratio_log = 0.0;     // |delta| N^2 / (n^2 (ln N)^2)
    double ratio_plain = 0.0;   // |delta| N^2 / n^2
    double ratio_budget = 0.0;  // |delta| N^{2 - 2/a} / n = |delta| / (n y_N)
    double I1_ratio = 0.0;
    double I2_ratio = 0.0;
    double I3_ratio = 0.0;
    double I_identity_gap = 0.0;  // |I1 + I2 + I3 - I(N)|
    double I_quad_error = 0.0;    // summed quadrature error of the four
    double zN = 0.0;
    double yN = 0.0;
    double smoother_tail = 0.0;
    bool in_range = false;
    bool discordant = false;
    bool budget_ok = false;
    std::string error;
};

// Fills the normalized-ratio fields from n, N, delta and yN; used by
// run_experiment and directly by tests on synthetic cells.
void compute_cell_ratios(CellResult& cell);

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<CellResult> cells;  // grid order: n ascending, N ascending
    std::size_t discordant_count = 0;
    std::size_t error_count = 0;
};

// Evaluate every grid cell (inversion, correction-integral decomposition,
// and the selected Monte Carlo estimator).  Cells are dispatched to
// config.workers threads; results are assembled in grid order, so the
// output is byte-for-byte independent of the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Per-slice least-squares fit of ln|delta| against ln N.
struct SliceFit {
    std::uint64_t n = 0;
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
    std::size_t excluded = 0;  // discordant or failed cells dropped
};

struct ScalingSummary {
    std::vector<SliceFit> slices;
    bool symmetric = false;   // p == q: ratio_plain is the normalized ratio
    double ratio_max = 0.0;   // over in-range, non-discordant cells
    double ratio_median = 0.0;
    std::size_t excluded_discordant = 0;
};

// Fits each n-slice over its in-range, non-discordant cells and reports the
// max and median of the normalized ratio (ratio_log, or ratio_plain when
// p == q).  Throws std::runtime_error when any slice that has in-range
// cells ends up with fewer than 4 usable points.
ScalingSummary fit_scaling(const ExperimentResult& result);

// Report emission.  write_csv emits the fixed 18-column schema
//     n, N, g, P_X1, P_Sn_inv, P_Sn_inv_err, P_Sn_mc, P_Sn_mc_err, delta,
//     ratio_log, ratio_plain, I1_ratio, I2_ratio, I3_ratio, zN, yN,
//     in_range, discordant
// preceded by '#' comment lines; the timestamp line is optional so tests
// can compare runs byte for byte.
void write_csv(std::ostream& os, const ExperimentResult& result,
               bool with_timestamp);

std::string json_summary(const ExperimentResult& result);

// Writes report.csv, summary.json, per-slice slice_n*.dat files
// (ln N, ln|delta| pairs) and a plot.gp driver into out_dir, creating the
// directory if needed.
void write_report_files(const ExperimentResult& result,
                        const std::string& out_dir, bool with_timestamp);

} // namespace heavytail

#endif
