#include "heavytail/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "heavytail/charfn.hpp"
#include "heavytail/montecarlo.hpp"
#include "heavytail/special.hpp"

namespace heavytail {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_line(const std::string& path, std::size_t lineno,
                           const std::string& what)
{
    throw ConfigError(path + ":" + std::to_string(lineno) + ": " + what);
}

double parse_double(const std::string& v, const std::string& key)
{
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v +
                          "'");
    }
    if (used != v.size())
        throw ConfigError("key '" + key + "': trailing characters in '" + v +
                          "'");
    return x;
}

std::uint64_t parse_uint(const std::string& v, const std::string& key)
{
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key +
                          "': expected a non-negative integer, got '" + v +
                          "'");
    }
    if (used != v.size() || v.find('-') != std::string::npos)
        throw ConfigError("key '" + key +
                          "': expected a non-negative integer, got '" + v +
                          "'");
    return x;
}

bool parse_bool(const std::string& v, const std::string& key)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v +
                      "'");
}

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::string item;
    for (char c : v) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!item.empty())
                out.push_back(item);
            item.clear();
        } else {
            item += c;
        }
    }
    if (!item.empty())
        out.push_back(item);
    return out;
}

// One grid cell before evaluation.
struct CellSpec {
    std::uint64_t n;
    double N;
    double g;
    std::uint32_t stream;  // RNG stream: cell index in grid order
};

std::vector<CellSpec> build_grid(const ExperimentConfig& cfg)
{
    std::vector<CellSpec> cells;
    for (std::uint64_t n : cfg.n_values) {
        std::vector<double> Ns;
        const double base =
            static_cast<double>(n) *
            std::pow(std::log(static_cast<double>(n)), cfg.N_logpow);
        for (double coef : cfg.N_coefs)
            Ns.push_back(coef * base);
        if (cfg.include_linear_arm)
            Ns.push_back(cfg.linear_coef * static_cast<double>(n));
        std::sort(Ns.begin(), Ns.end());
        for (double N : Ns) {
            CellSpec c;
            c.n = n;
            c.N = N;
            c.g = std::pow(N, cfg.g_power);
            c.stream = static_cast<std::uint32_t>(cells.size());
            cells.push_back(c);
        }
    }
    return cells;
}

double median_of(std::vector<double> v)
{
    if (v.empty())
        return nan_v;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return (v.size() % 2 == 1) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto cut = line.find_first_of("#;");
        if (cut != std::string::npos)
            line.erase(cut);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                bad_line(path, lineno, "malformed section header");
            continue;  // sections are decorative; keys are flat
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            bad_line(path, lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            bad_line(path, lineno, "empty key");
        if (val.empty())
            bad_line(path, lineno, "empty value for key '" + key + "'");
        if (!seen.insert(key).second)
            bad_line(path, lineno, "duplicate key '" + key + "'");

        if (key == "p")
            cfg.p = parse_double(val, key);
        else if (key == "x0")
            cfg.x0 = parse_double(val, key);
        else if (key == "c1p")
            cfg.c1p = parse_double(val, key);
        else if (key == "c1m")
            cfg.c1m = parse_double(val, key);
        else if (key == "epsilon")
            cfg.epsilon = parse_double(val, key);
        else if (key == "k")
            cfg.k = static_cast<int>(parse_uint(val, key));
        else if (key == "a")
            cfg.a = parse_double(val, key);
        else if (key == "n_values") {
            cfg.n_values.clear();
            for (const std::string& s : split_list(val))
                cfg.n_values.push_back(parse_uint(s, key));
        } else if (key == "N_coefs") {
            cfg.N_coefs.clear();
            for (const std::string& s : split_list(val))
                cfg.N_coefs.push_back(parse_double(s, key));
        } else if (key == "N_logpow")
            cfg.N_logpow = static_cast<int>(parse_uint(val, key));
        else if (key == "include_linear_arm")
            cfg.include_linear_arm = parse_bool(val, key);
        else if (key == "linear_coef")
            cfg.linear_coef = parse_double(val, key);
        else if (key == "g_power")
            cfg.g_power = parse_double(val, key);
        else if (key == "range_ratio")
            cfg.range_ratio = parse_double(val, key);
        else if (key == "estimator") {
            if (val == "bigjump")
                cfg.estimator = Estimator::bigjump;
            else if (val == "naive")
                cfg.estimator = Estimator::naive;
            else if (val == "none")
                cfg.estimator = Estimator::none;
            else
                bad_line(path, lineno,
                         "estimator must be bigjump, naive or none");
        } else if (key == "trials")
            cfg.trials = parse_uint(val, key);
        else if (key == "seed")
            cfg.seed = parse_uint(val, key);
        else if (key == "force_naive")
            cfg.force_naive = parse_bool(val, key);
        else if (key == "workers")
            cfg.workers = static_cast<int>(parse_uint(val, key));
        else if (key == "far_mode") {
            if (val == "budgeted")
                cfg.far_mode = FarMode::budgeted;
            else if (val == "exact")
                cfg.far_mode = FarMode::exact;
            else
                bad_line(path, lineno, "far_mode must be budgeted or exact");
        } else if (key == "out_dir")
            cfg.out_dir = val;
        else
            bad_line(path, lineno, "unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

TailModel ExperimentConfig::model() const
{
    return TailModel(p, x0, c1p, c1m);
}

SmootherSpec ExperimentConfig::smoother() const
{
    return SmootherSpec(epsilon, k, a);
}

void ExperimentConfig::validate() const
{
    try {
        const TailModel m = model();
        if (!m.canonical())
            throw ConfigError(
                "the experiment requires the canonical model (x0 = 1, "
                "c1p = c1m = 0); perturbed tails are served by the model "
                "and mc subcommands only");
        (void)smoother();
        if (!(range_ratio > 0.0) || !(range_ratio <= 1.0))
            throw ConfigError("range_ratio must lie in (0, 1]");
        if (!(g_power >= 2.0))
            throw ConfigError("g_power must be >= 2 so that g >= N^2");
        if (N_logpow < 0 || N_logpow > 8)
            throw ConfigError("N_logpow must lie in [0, 8]");
        if (!(linear_coef > 0.0))
            throw ConfigError("linear_coef must be positive");
        for (double coef : N_coefs)
            if (!(coef > 0.0))
                throw ConfigError("N_coefs entries must be positive");
        if (workers < 1 || workers > 256)
            throw ConfigError("workers must lie in [1, 256]");
        if (estimator != Estimator::none && trials < 1)
            throw ConfigError("trials must be >= 1");
        for (std::uint64_t n : n_values) {
            if (n < 2)
                throw ConfigError("n_values entries must be >= 2");
            if (n > (1u << 20))
                throw ConfigError("n_values entries must be <= 2^20");
        }
        // Cell invariants: N must clear both the support edge and the
        // norming level b_n, below which the excess is not a deviation.
        for (const CellSpec& c : build_grid(*this)) {
            const Norming nrm = norming(model(), c.n);
            if (!(c.N > std::max(nrm.b_n, x0)))
                throw ConfigError(
                    "grid cell n = " + std::to_string(c.n) + ", N = " +
                    fmt_double(c.N) +
                    " does not exceed the norming level b_n = " +
                    fmt_double(nrm.b_n));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

void compute_cell_ratios(CellResult& cell)
{
    const double lnN = std::log(cell.N);
    const double n2 =
        static_cast<double>(cell.n) * static_cast<double>(cell.n);
    const double ad = std::abs(cell.delta);
    cell.ratio_log = ad * cell.N * cell.N / (n2 * lnN * lnN);
    cell.ratio_plain = ad * cell.N * cell.N / n2;
    cell.ratio_budget = std::isfinite(cell.yN) && cell.yN > 0.0
                            ? ad / (static_cast<double>(cell.n) * cell.yN)
                            : nan_v;
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    config.validate();
    ExperimentResult result;
    result.config = config;

    const TailModel model = config.model();
    const SmootherSpec smoother = config.smoother();
    const std::vector<CellSpec> grid = build_grid(config);
    result.cells.assign(grid.size(), CellResult{});

    std::atomic<std::size_t> next{0};
    auto eval_cell = [&](const CellSpec& spec, CellResult& cell) {
        cell.n = spec.n;
        cell.N = spec.N;
        cell.g = spec.g;
        cell.P_X1 = cell.P_Sn_inv = cell.P_Sn_inv_err = nan_v;
        cell.P_Sn_mc = cell.P_Sn_mc_err = nan_v;
        cell.delta = cell.ratio_log = cell.ratio_plain = nan_v;
        cell.ratio_budget = nan_v;
        cell.I1_ratio = cell.I2_ratio = cell.I3_ratio = nan_v;
        cell.I_identity_gap = cell.I_quad_error = nan_v;
        cell.zN = cell.yN = cell.smoother_tail = nan_v;
        const double lnN = std::log(spec.N);
        cell.in_range = static_cast<double>(spec.n) * lnN * lnN <
                        config.range_ratio * spec.N;
        try {
            const DeviationResult dev = deviation_delta(
                model, smoother, spec.n, spec.N, spec.g, config.far_mode);
            cell.P_X1 = dev.P_X1;
            cell.P_Sn_inv = dev.P_Sn;
            cell.P_Sn_inv_err = dev.Sn.budget.total();
            cell.delta = dev.delta;
            cell.zN = dev.Sn.budget.z_N;
            cell.yN = dev.Sn.budget.y_N;
            cell.smoother_tail = dev.Sn.budget.smoother_tail;
            cell.budget_ok = dev.Sn.budget.budget_ok;
            compute_cell_ratios(cell);

            const IDecomposition idec =
                i_decomposition(model, smoother, spec.n, spec.N);
            cell.I1_ratio = idec.ratio1;
            cell.I2_ratio = idec.ratio2;
            cell.I3_ratio = idec.ratio3;
            cell.I_identity_gap = idec.identity_gap;
            cell.I_quad_error = idec.quad_error;

            if (config.estimator != Estimator::none) {
                const McEstimate mc =
                    config.estimator == Estimator::bigjump
                        ? bigjump_tail_estimate(model, spec.n, spec.N,
                                                config.trials, config.seed,
                                                1, spec.stream)
                        : naive_tail_estimate(model, spec.n, spec.N,
                                              config.trials, config.seed, 1,
                                              config.force_naive,
                                              spec.stream);
                cell.P_Sn_mc = mc.estimate;
                cell.P_Sn_mc_err = mc.std_error;
                // The inversion value is P(S_n + Y > N) while the sampler
                // targets P(S_n > N); the smoothing part of the budget
                // covers that gap, so the comparison bar is the full
                // budget plus four standard errors.
                cell.discordant =
                    std::abs(cell.P_Sn_inv - cell.P_Sn_mc) >
                    cell.P_Sn_inv_err + 4.0 * cell.P_Sn_mc_err;
            }
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    };

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size())
                return;
            eval_cell(grid[i], result.cells[i]);
        }
    };
    if (config.workers == 1 || grid.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int nw = std::min<int>(config.workers,
                                     static_cast<int>(grid.size()));
        pool.reserve(nw);
        for (int w = 0; w < nw; ++w)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    for (const CellResult& c : result.cells) {
        if (c.discordant)
            ++result.discordant_count;
        if (!c.error.empty())
            ++result.error_count;
    }
    return result;
}

ScalingSummary fit_scaling(const ExperimentResult& result)
{
    ScalingSummary summary;
    summary.symmetric = result.config.p == 1.0 - result.config.p;

    std::map<std::uint64_t, std::vector<const CellResult*>> slices;
    for (const CellResult& c : result.cells)
        if (c.in_range)
            slices[c.n].push_back(&c);

    std::vector<double> ratios;
    for (const auto& [n, cells] : slices) {
        SliceFit fit;
        fit.n = n;
        std::vector<double> xs, ys;
        for (const CellResult* c : cells) {
            if (c->discordant || !c->error.empty() ||
                !std::isfinite(c->delta) || c->delta == 0.0) {
                ++fit.excluded;
                continue;
            }
            xs.push_back(std::log(c->N));
            ys.push_back(std::log(std::abs(c->delta)));
            ratios.push_back(summary.symmetric ? c->ratio_plain
                                               : c->ratio_log);
        }
        fit.points = xs.size();
        summary.excluded_discordant += fit.excluded;
        if (fit.points < 4)
            throw std::runtime_error(
                "fit_scaling: slice n = " + std::to_string(n) + " has " +
                std::to_string(fit.points) +
                " usable in-range points; at least 4 are required");
        double sx = 0, sy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
        }
        const double mx = sx / xs.size(), my = sy / ys.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        fit.slope = sxy / sxx;
        fit.intercept = my - fit.slope * mx;
        summary.slices.push_back(fit);
    }
    if (summary.slices.empty())
        throw std::runtime_error(
            "fit_scaling: no in-range cells to fit");
    summary.ratio_max = *std::max_element(ratios.begin(), ratios.end());
    summary.ratio_median = median_of(ratios);
    return summary;
}

void write_csv(std::ostream& os, const ExperimentResult& result,
               bool with_timestamp)
{
    os << "# heavytail-ld experiment report\n";
    os << "# schema: heavytail-report-v1\n";
    if (with_timestamp) {
        char stamp[64];
        const std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
        os << "# generated: " << stamp << "\n";
    }
    os << "n,N,g,P_X1,P_Sn_inv,P_Sn_inv_err,P_Sn_mc,P_Sn_mc_err,delta,"
          "ratio_log,ratio_plain,I1_ratio,I2_ratio,I3_ratio,zN,yN,"
          "in_range,discordant\n";
    for (const CellResult& c : result.cells) {
        os << c.n << ',' << fmt_double(c.N) << ',' << fmt_double(c.g) << ','
           << fmt_double(c.P_X1) << ',' << fmt_double(c.P_Sn_inv) << ','
           << fmt_double(c.P_Sn_inv_err) << ',' << fmt_double(c.P_Sn_mc)
           << ',' << fmt_double(c.P_Sn_mc_err) << ',' << fmt_double(c.delta)
           << ',' << fmt_double(c.ratio_log) << ','
           << fmt_double(c.ratio_plain) << ',' << fmt_double(c.I1_ratio)
           << ',' << fmt_double(c.I2_ratio) << ',' << fmt_double(c.I3_ratio)
           << ',' << fmt_double(c.zN) << ',' << fmt_double(c.yN) << ','
           << (c.in_range ? 1 : 0) << ',' << (c.discordant ? 1 : 0) << '\n';
    }
}

std::string json_summary(const ExperimentResult& result)
{
    using nlohmann::json;
    const ExperimentConfig& cfg = result.config;
    json j;
    j["schema"] = "heavytail-summary-v1";
    j["model"] = {{"p", cfg.p},
                  {"q", 1.0 - cfg.p},
                  {"x0", cfg.x0},
                  {"c1p", cfg.c1p},
                  {"c1m", cfg.c1m}};
    j["smoother"] = {{"epsilon", cfg.epsilon}, {"k", cfg.k}, {"a", cfg.a}};
    j["grid"] = {{"n_values", cfg.n_values},
                 {"N_coefs", cfg.N_coefs},
                 {"N_logpow", cfg.N_logpow},
                 {"include_linear_arm", cfg.include_linear_arm},
                 {"linear_coef", cfg.linear_coef},
                 {"g_power", cfg.g_power},
                 {"range_ratio", cfg.range_ratio}};
    j["estimator"] = cfg.estimator == Estimator::bigjump ? "bigjump"
                     : cfg.estimator == Estimator::naive ? "naive"
                                                         : "none";
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["rng"] = rng_identity;
    j["far_mode"] =
        cfg.far_mode == FarMode::budgeted ? "budgeted" : "exact";

    // Small-t structure of the characteristic function: the drift
    // coefficient c = p - q vanishes exactly in the symmetric case, which
    // switches the normalized ratio used by the fit.
    const ExpansionCoeffs coeffs = expansion_coeffs(result.config.model());
    j["expansion"] = {{"c", coeffs.c},
                      {"C0", coeffs.C0},
                      {"C", coeffs.C},
                      {"c_fit", coeffs.c_fit},
                      {"C0_fit", coeffs.C0_fit},
                      {"C_fit", coeffs.C_fit}};
    j["symmetric"] = cfg.p == 1.0 - cfg.p;

    j["cells"] = result.cells.size();
    std::size_t in_range = 0;
    for (const CellResult& c : result.cells)
        if (c.in_range)
            ++in_range;
    j["in_range_cells"] = in_range;
    j["discordant_cells"] = result.discordant_count;
    j["cell_errors"] = json::array();
    for (std::size_t i = 0; i < result.cells.size(); ++i)
        if (!result.cells[i].error.empty())
            j["cell_errors"].push_back({{"index", i},
                                        {"n", result.cells[i].n},
                                        {"N", result.cells[i].N},
                                        {"error", result.cells[i].error}});

    try {
        const ScalingSummary fit = fit_scaling(result);
        json slices = json::array();
        for (const SliceFit& s : fit.slices)
            slices.push_back({{"n", s.n},
                              {"slope", s.slope},
                              {"intercept", s.intercept},
                              {"points", s.points},
                              {"excluded", s.excluded}});
        j["fit"] = {{"slices", slices},
                    {"ratio_max", fit.ratio_max},
                    {"ratio_median", fit.ratio_median},
                    {"ratio_kind", fit.symmetric ? "plain" : "log"},
                    {"excluded_discordant", fit.excluded_discordant}};
    } catch (const std::exception& e) {
        j["fit"] = {{"error", e.what()}};
    }
    return j.dump(2);
}

void write_report_files(const ExperimentResult& result,
                        const std::string& out_dir, bool with_timestamp)
{
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream csv(fs::path(out_dir) / "report.csv",
                          std::ios::binary);
        if (!csv)
            throw std::runtime_error("cannot write report.csv in '" +
                                     out_dir + "'");
        write_csv(csv, result, with_timestamp);
    }
    {
        std::ofstream js(fs::path(out_dir) / "summary.json",
                         std::ios::binary);
        js << json_summary(result) << '\n';
    }
    std::vector<std::uint64_t> ns;
    for (const CellResult& c : result.cells)
        if (ns.empty() || ns.back() != c.n)
            ns.push_back(c.n);
    for (std::uint64_t n : ns) {
        std::ofstream dat(fs::path(out_dir) /
                              ("slice_n" + std::to_string(n) + ".dat"),
                          std::ios::binary);
        dat << "# ln(N)  ln(|delta|)  in_range  discordant\n";
        for (const CellResult& c : result.cells) {
            if (c.n != n || !std::isfinite(c.delta) || c.delta == 0.0)
                continue;
            dat << fmt_double(std::log(c.N)) << ' '
                << fmt_double(std::log(std::abs(c.delta))) << ' '
                << (c.in_range ? 1 : 0) << ' ' << (c.discordant ? 1 : 0)
                << '\n';
        }
    }
    std::ofstream gp(fs::path(out_dir) / "plot.gp", std::ios::binary);
    gp << "# gnuplot driver: ln|delta| against ln N, one curve per n\n"
          "set xlabel 'ln N'\n"
          "set ylabel 'ln |delta|'\n"
          "set key left bottom\n"
          "plot ";
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (i)
            gp << ", \\\n     ";
        gp << "'slice_n" << ns[i] << ".dat' using 1:2 with linespoints "
           << "title 'n = " << ns[i] << "'";
    }
    gp << "\n";
}

} // namespace heavytail
