#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "heavytail/harness.hpp"

namespace fs = std::filesystem;

using heavytail::CellResult;
using heavytail::compute_cell_ratios;
using heavytail::ConfigError;
using heavytail::Estimator;
using heavytail::ExperimentConfig;
using heavytail::ExperimentResult;
using heavytail::FarMode;
using heavytail::fit_scaling;
using heavytail::json_summary;
using heavytail::run_experiment;
using heavytail::ScalingSummary;
using heavytail::write_csv;

namespace {

std::string write_tmp(const std::string& name, const std::string& text)
{
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream f(p, std::ios::binary);
    f << text;
    return p.string();
}

void expect_config_error(const std::string& name, const std::string& text,
                         const std::string& needle)
{
    const std::string path = write_tmp(name, text);
    try {
        (void)ExperimentConfig::from_file(path);
        FAIL_CHECK("expected ConfigError for " << name);
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK_MESSAGE(what.find(needle) != std::string::npos,
                      "message '" << what << "' lacks '" << needle << "'");
    }
}

// A synthetic in-range cell with a planted excess, ratios filled in.
CellResult planted_cell(std::uint64_t n, double N, double delta)
{
    CellResult c;
    c.n = n;
    c.N = N;
    c.g = N * N;
    c.delta = delta;
    c.yN = std::pow(N, 2.0 / 3.0 - 2.0);
    c.in_range = true;
    compute_cell_ratios(c);
    return c;
}

} // namespace

TEST_CASE("config file: sections, comments, lists and enums round-trip")
{
    const std::string path = write_tmp("ht_roundtrip.ini", R"(
# full-grammar exercise
[model]
p = 0.5

[grid]
n_values = 4, 8
N_coefs = 30 60
N_logpow = 0
include_linear_arm = false
linear_coef = 7.5
g_power = 2.5
range_ratio = 0.5

[smoother]
epsilon = 0.4
k = 3
a = 2.5

[mc]
estimator = naive
trials = 5000
seed = 99
force_naive = yes

[run]
workers = 2
far_mode = exact
out_dir = reports/demo   ; trailing comment
)");
    const ExperimentConfig cfg = ExperimentConfig::from_file(path);
    CHECK(cfg.p == 0.5);
    CHECK(cfg.n_values == std::vector<std::uint64_t>{4, 8});
    CHECK(cfg.N_coefs == std::vector<double>{30.0, 60.0});
    CHECK(cfg.N_logpow == 0);
    CHECK(cfg.include_linear_arm == false);
    CHECK(cfg.linear_coef == 7.5);
    CHECK(cfg.g_power == 2.5);
    CHECK(cfg.range_ratio == 0.5);
    CHECK(cfg.epsilon == 0.4);
    CHECK(cfg.k == 3);
    CHECK(cfg.a == 2.5);
    CHECK(cfg.estimator == Estimator::naive);
    CHECK(cfg.trials == 5000);
    CHECK(cfg.seed == 99);
    CHECK(cfg.force_naive == true);
    CHECK(cfg.workers == 2);
    CHECK(cfg.far_mode == FarMode::exact);
    CHECK(cfg.out_dir == "reports/demo");
}

TEST_CASE("config file: malformed input is rejected with the offending part")
{
    expect_config_error("ht_unknown.ini", "shape = 2\n", "unknown key");
    expect_config_error("ht_dup.ini", "p = 0.6\np = 0.7\n", "duplicate key");
    expect_config_error("ht_badnum.ini", "p = fast\n", "expected a number");
    expect_config_error("ht_badint.ini", "trials = -5\n",
                        "non-negative integer");
    expect_config_error("ht_badsec.ini", "[model\np = 0.6\n",
                        "malformed section");
    expect_config_error("ht_noeq.ini", "just words\n", "key = value");
    expect_config_error("ht_empty.ini", "p =\n", "empty value");
    expect_config_error("ht_badest.ini", "estimator = fastest\n",
                        "estimator must be");
    expect_config_error("ht_badfar.ini", "far_mode = lazy\n",
                        "far_mode must be");
    expect_config_error("ht_badbool.ini", "force_naive = maybe\n",
                        "expected a boolean");

    CHECK_THROWS_AS(ExperimentConfig::from_file("/does/not/exist.ini"),
                    ConfigError);
}

TEST_CASE("config validation: field ranges and grid invariants")
{
    const auto fails = [](void (*tweak)(ExperimentConfig&),
                          const std::string& needle) {
        ExperimentConfig cfg;
        cfg.estimator = Estimator::none;
        tweak(cfg);
        try {
            cfg.validate();
            FAIL_CHECK("expected ConfigError containing '" << needle << "'");
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            CHECK_MESSAGE(what.find(needle) != std::string::npos,
                          "message '" << what << "' lacks '" << needle
                                      << "'");
        }
    };

    fails([](ExperimentConfig& c) { c.x0 = 2.0; }, "canonical");
    // c1p must stay negative here: with x0 = 1 a positive perturbation
    // pushes the total tail mass past 1 and the model constructor rejects
    // it before the canonical gate is reached.
    fails([](ExperimentConfig& c) { c.c1p = -0.1; }, "canonical");
    fails([](ExperimentConfig& c) { c.g_power = 1.5; }, "g_power");
    fails([](ExperimentConfig& c) { c.range_ratio = 0.0; }, "range_ratio");
    fails([](ExperimentConfig& c) { c.range_ratio = 1.5; }, "range_ratio");
    fails([](ExperimentConfig& c) { c.N_logpow = 9; }, "N_logpow");
    fails([](ExperimentConfig& c) { c.linear_coef = 0.0; }, "linear_coef");
    fails([](ExperimentConfig& c) { c.N_coefs = {10.0, -1.0}; }, "N_coefs");
    fails([](ExperimentConfig& c) { c.workers = 0; }, "workers");
    fails([](ExperimentConfig& c) { c.workers = 500; }, "workers");
    fails([](ExperimentConfig& c) { c.n_values = {1, 4}; }, "n_values");
    fails([](ExperimentConfig& c) { c.epsilon = 1.5; }, "epsilon");
    fails(
        [](ExperimentConfig& c) {
            c.estimator = Estimator::bigjump;
            c.trials = 0;
        },
        "trials");

    // The out-of-range linear arm must still clear the norming level: with
    // p = 0.99 and n = 256, b_n = 0.98 * 256 * ln 256 = 1391 > 5 * 256.
    fails(
        [](ExperimentConfig& c) {
            c.p = 0.99;
            c.n_values = {256};
        },
        "norming level");

    // estimator none tolerates trials = 0.
    ExperimentConfig ok;
    ok.estimator = Estimator::none;
    ok.trials = 0;
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("tiny experiment: grid order, cell contents, reproducibility")
{
    ExperimentConfig cfg;
    cfg.estimator = Estimator::none;
    cfg.n_values = {4, 8};
    cfg.N_coefs = {30.0, 60.0};
    cfg.N_logpow = 0;
    cfg.include_linear_arm = false;

    const ExperimentResult r1 = run_experiment(cfg);
    REQUIRE(r1.cells.size() == 4);
    CHECK(r1.error_count == 0);
    CHECK(r1.discordant_count == 0);

    const std::uint64_t want_n[] = {4, 4, 8, 8};
    const double want_N[] = {120.0, 240.0, 240.0, 480.0};
    for (std::size_t i = 0; i < 4; ++i) {
        const CellResult& c = r1.cells[i];
        CAPTURE(i);
        CHECK(c.n == want_n[i]);
        CHECK(c.N == want_N[i]);
        CHECK(c.g == want_N[i] * want_N[i]);
        CHECK(c.error.empty());
        CHECK(c.P_X1 == 0.7 / c.N);
        CHECK(std::isfinite(c.delta));
        CHECK(std::isfinite(c.ratio_log));
        CHECK(std::isfinite(c.I1_ratio));
        CHECK(std::isfinite(c.I_identity_gap));
        CHECK(c.zN == doctest::Approx(std::pow(c.N, 2.0 / 3.0)));
        CHECK(std::isnan(c.P_Sn_mc));   // estimator none
        CHECK(!c.in_range);             // deliberately shallow grid
    }

    // Same grid across worker counts: the CSV must match byte for byte.
    ExperimentConfig cfg3 = cfg;
    cfg3.workers = 3;
    const ExperimentResult r3 = run_experiment(cfg3);
    std::ostringstream s1, s3;
    write_csv(s1, r1, false);
    write_csv(s3, r3, false);
    CHECK(s1.str() == s3.str());

    // Fixed preamble and 18 columns per row.
    std::istringstream lines(s1.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "# heavytail-ld experiment report");
    std::getline(lines, line);
    CHECK(line == "# schema: heavytail-report-v1");
    std::getline(lines, line);
    CHECK(line ==
          "n,N,g,P_X1,P_Sn_inv,P_Sn_inv_err,P_Sn_mc,P_Sn_mc_err,delta,"
          "ratio_log,ratio_plain,I1_ratio,I2_ratio,I3_ratio,zN,yN,"
          "in_range,discordant");
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        const std::size_t commas =
            static_cast<std::size_t>(std::count(line.begin(), line.end(),
                                                ','));
        CHECK(commas == 17);
    }
    CHECK(rows == 4);

    // No in-range cells: the fit refuses, and the summary records why.
    CHECK_THROWS_AS(fit_scaling(r1), std::runtime_error);
    const nlohmann::json js = nlohmann::json::parse(json_summary(r1));
    CHECK(js["schema"] == "heavytail-summary-v1");
    CHECK(js["cells"] == 4);
    CHECK(js["in_range_cells"] == 0);
    CHECK(js["estimator"] == "none");
    CHECK(js["rng"] == "philox4x32-10/v1");
    CHECK(js["symmetric"] == false);
    CHECK(js["expansion"]["c"] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(js["fit"].contains("error"));

    // Report bundle on disk.
    const fs::path dir = fs::temp_directory_path() / "ht_report_demo";
    fs::remove_all(dir);
    heavytail::write_report_files(r1, dir.string(), false);
    CHECK(fs::exists(dir / "report.csv"));
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "slice_n4.dat"));
    CHECK(fs::exists(dir / "slice_n8.dat"));
    CHECK(fs::exists(dir / "plot.gp"));
}

TEST_CASE("cell ratios follow their defining arithmetic")
{
    CellResult c;
    c.n = 3;
    c.N = 100.0;
    c.delta = -9.0 * std::log(100.0) * std::log(100.0) / 1e4;
    c.yN = std::pow(100.0, 2.0 / 3.0 - 2.0);
    compute_cell_ratios(c);
    CHECK(c.ratio_log == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.ratio_plain ==
          doctest::Approx(std::log(100.0) * std::log(100.0)).epsilon(1e-12));
    CHECK(c.ratio_budget ==
          doctest::Approx(std::abs(c.delta) / (3.0 * c.yN)).epsilon(1e-12));
}

TEST_CASE("scaling fit recovers planted slopes and ratios")
{
    // delta = n / N^2 with p = q: slope exactly -2 and n * ratio_plain = 1.
    ExperimentResult flat;
    flat.config.p = 0.5;
    for (const double lnN : {5.0, 6.0, 7.0, 8.0})
        flat.cells.push_back(planted_cell(4, std::exp(lnN),
                                          4.0 / std::exp(2.0 * lnN)));
    const ScalingSummary f = fit_scaling(flat);
    CHECK(f.symmetric);
    REQUIRE(f.slices.size() == 1);
    CHECK(f.slices[0].n == 4);
    CHECK(f.slices[0].points == 4);
    CHECK(f.slices[0].slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(f.slices[0].intercept == doctest::Approx(std::log(4.0)));
    CHECK(4.0 * f.ratio_max == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(4.0 * f.ratio_median == doctest::Approx(1.0).epsilon(1e-12));

    // delta = n^2 (ln N)^2 / N^2 with p != q: the fitted slope is an
    // average of difference quotients of -2 ln N + 2 ln ln N, hence lands
    // inside [-2 + 2/max ln N, -2 + 2/min ln N] = [-1.75, -1.6].
    ExperimentResult curved;
    curved.config.p = 0.7;
    for (const double lnN : {5.0, 6.0, 7.0, 8.0})
        curved.cells.push_back(planted_cell(
            4, std::exp(lnN), 16.0 * lnN * lnN / std::exp(2.0 * lnN)));
    const ScalingSummary g = fit_scaling(curved);
    CHECK(!g.symmetric);
    CHECK(g.slices[0].slope > -1.76);
    CHECK(g.slices[0].slope < -1.59);
    CHECK(g.ratio_max == doctest::Approx(1.0).epsilon(1e-12));

    // A discordant cell is excluded; dropping below 4 usable points throws.
    ExperimentResult sparse = flat;
    sparse.cells[1].discordant = true;
    CHECK_THROWS_AS(fit_scaling(sparse), std::runtime_error);

    // With 5 points, one exclusion still fits and is accounted for.
    ExperimentResult wide = flat;
    wide.cells.push_back(planted_cell(4, std::exp(9.0),
                                      4.0 / std::exp(18.0)));
    wide.cells[0].discordant = true;
    const ScalingSummary h = fit_scaling(wide);
    CHECK(h.slices[0].points == 4);
    CHECK(h.slices[0].excluded == 1);
    CHECK(h.excluded_discordant == 1);
    CHECK(h.slices[0].slope == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("an empty grid still produces a coherent report")
{
    ExperimentConfig cfg;
    cfg.n_values = {};
    cfg.validate();  // an empty grid is legal, just vacuous
    const ExperimentResult res = run_experiment(cfg);
    CHECK(res.cells.empty());
    CHECK(res.error_count == 0);

    std::ostringstream csv;
    write_csv(csv, res, false);
    CHECK(csv.str().find("n,N,g,") != std::string::npos);

    const auto js = nlohmann::json::parse(json_summary(res));
    CHECK(js.at("cells").get<std::size_t>() == 0);
    CHECK(js.at("fit").contains("error"));

    bool threw = false;
    try {
        fit_scaling(res);
    } catch (const std::runtime_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("no in-range cells") !=
              std::string::npos);
    }
    CHECK(threw);
}
