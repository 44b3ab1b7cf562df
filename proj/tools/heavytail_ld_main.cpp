// heavytail-ld: command-line front end for the heavy-tail large-deviation
// toolkit.  Subcommands:
//   run     evaluate an experiment grid from a config file
//   charfn  characteristic-function jets at a point
//   quad    oscillatory quadrature diagnostics
//   invert  smoothed tail inversion at one (n, N)
//   mc      Monte Carlo tail estimators and the two-fold convolution oracle
// Exit codes: 0 success, 1 runtime failure, 2 configuration error,
// 3 discordant grid cells under --strict.

#include <complex>
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "heavytail/charfn.hpp"
#include "heavytail/harness.hpp"
#include "heavytail/inversion.hpp"
#include "heavytail/model.hpp"
#include "heavytail/montecarlo.hpp"
#include "heavytail/quadrature.hpp"
#include "heavytail/smoother.hpp"

namespace {

using nlohmann::json;

json complex_json(std::complex<double> z)
{
    return json{{"re", z.real()}, {"im", z.imag()}};
}

struct ModelOpts {
    double p = 0.7;
    double x0 = 1.0;
    double c1p = 0.0;
    double c1m = 0.0;

    void attach(CLI::App* app)
    {
        app->add_option("--p", p, "upper-tail weight p (q = 1 - p)");
        app->add_option("--x0", x0, "tail support edge (>= 1)");
        app->add_option("--c1p", c1p, "second-order upper tail coefficient");
        app->add_option("--c1m", c1m, "second-order lower tail coefficient");
    }

    heavytail::TailModel model() const
    {
        return heavytail::TailModel(p, x0, c1p, c1m);
    }
};

struct SmootherOpts {
    double epsilon = 0.5;
    int k = 4;
    double a = 3.0;

    void attach(CLI::App* app)
    {
        app->add_option("--epsilon", epsilon,
                        "smoother bandwidth (spectrum support)");
        app->add_option("--k", k, "smoother order (spline order 2k)");
        app->add_option("--a", a, "error-budget exponent, in (2, 2k-1)");
    }

    heavytail::SmootherSpec spec() const
    {
        return heavytail::SmootherSpec(epsilon, k, a);
    }
};

int cmd_run(const std::string& config_path, const std::string& out_override,
            bool no_timestamp, bool strict)
{
    heavytail::ExperimentConfig cfg =
        heavytail::ExperimentConfig::from_file(config_path);
    if (!out_override.empty())
        cfg.out_dir = out_override;
    const heavytail::ExperimentResult result =
        heavytail::run_experiment(cfg);
    if (!cfg.out_dir.empty()) {
        heavytail::write_report_files(result, cfg.out_dir, !no_timestamp);
    } else {
        heavytail::write_csv(std::cout, result, !no_timestamp);
    }
    std::cerr << "cells: " << result.cells.size()
              << ", discordant: " << result.discordant_count
              << ", errors: " << result.error_count << "\n";
    if (strict && result.discordant_count > 0)
        return 3;
    return 0;
}

int cmd_charfn_eval(double t, std::uint64_t n, const ModelOpts& mopts)
{
    const heavytail::TailModel model = mopts.model();
    const heavytail::CharFnJet psi = heavytail::psi_exact(model, t);
    json j;
    j["t"] = t;
    j["n"] = n;
    j["p"] = model.p;
    j["psi"] = {{"value", complex_json(psi.value)},
                {"derivs_singular", psi.derivs_singular}};
    if (!psi.derivs_singular) {
        j["psi"]["d1"] = complex_json(psi.d1);
        j["psi"]["d2"] = complex_json(psi.d2);
    }
    if (t != 0.0) {
        const heavytail::CharFnJet theta = heavytail::theta_jet(model, t);
        j["theta"] = {{"value", complex_json(theta.value)},
                      {"d1", complex_json(theta.d1)},
                      {"d2", complex_json(theta.d2)}};
        const heavytail::FJet F = heavytail::F_jet(model, t, n);
        j["F"] = {{"value", complex_json(F.value)},
                  {"d1", complex_json(F.d1)}};
        j["decomposition_residual"] =
            heavytail::decomposition_residual(psi.value, n);
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_quad_logosc(double M, int r, int m, double upper, double p)
{
    heavytail::OscillandSpec spec;
    spec.M = M;
    spec.r = r;
    spec.m = m;
    spec.upper = upper;
    heavytail::TailModel model(p);
    if (m > 0)
        spec.cf = [model](double t) {
            return heavytail::psi_exact(model, t).value;
        };
    const heavytail::QuadResult res =
        heavytail::oscillatory_log_integral(spec);
    json j;
    j["M"] = M;
    j["r"] = r;
    j["m"] = m;
    j["upper"] = upper;
    j["value"] = complex_json(res.value);
    j["error"] = res.error;
    j["evaluations"] = res.evaluations;
    j["blocks"] = res.blocks;
    j["tail_bound"] = res.tail_bound;
    j["envelope"] = {{"head", res.envelope_head},
                     {"max", res.envelope_max},
                     {"median", res.envelope_median}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_invert(std::uint64_t n, double N, double g, const std::string& far,
               const ModelOpts& mopts, const SmootherOpts& sopts)
{
    const heavytail::FarMode mode = far == "exact"
                                        ? heavytail::FarMode::exact
                                        : heavytail::FarMode::budgeted;
    const heavytail::TailModel model = mopts.model();
    const heavytail::SmootherSpec smoother = sopts.spec();
    if (g <= 0.0)
        g = N * N;
    const heavytail::DeviationResult dev =
        heavytail::deviation_delta(model, smoother, n, N, g, mode);
    const heavytail::IDecomposition idec =
        heavytail::i_decomposition(model, smoother, n, N);
    json j;
    j["n"] = n;
    j["N"] = N;
    j["g"] = g;
    j["far_mode"] = far;
    j["P_X1"] = dev.P_X1;
    j["P_Sn"] = dev.P_Sn;
    j["delta"] = dev.delta;
    j["budget"] = {{"zN", dev.Sn.budget.z_N},
                   {"yN", dev.Sn.budget.y_N},
                   {"smoother_tail", dev.Sn.budget.smoother_tail},
                   {"smoothing_term", dev.Sn.budget.smoothing_term},
                   {"far_term", dev.Sn.budget.far_term},
                   {"quad_error", dev.Sn.budget.quad_error},
                   {"total", dev.Sn.budget.total()},
                   {"budget_ok", dev.Sn.budget.budget_ok}};
    j["I"] = idec.I_near;
    j["I1"] = idec.I1;
    j["I2"] = idec.I2;
    j["I3"] = idec.I3;
    j["identity_gap"] = idec.identity_gap;
    j["ratios"] = {{"I1", idec.ratio1},
                   {"I2", idec.ratio2},
                   {"I3", idec.ratio3}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

json mc_json(const heavytail::McEstimate& est, std::uint64_t seed)
{
    json j;
    j["estimate"] = est.estimate;
    j["std_error"] = est.std_error;
    j["trials"] = est.trials;
    j["hits"] = est.hits;
    j["seed"] = seed;
    j["rng"] = heavytail::rng_identity;
    if (!est.warning.empty())
        j["warning"] = est.warning;
    return j;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"heavy-tail large-deviation toolkit"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "evaluate an experiment grid");
    std::string config_path, out_override;
    bool no_timestamp = false, strict = false;
    run->add_option("--config", config_path, "experiment config file")
        ->required();
    run->add_option("--out", out_override,
                    "output directory (overrides the config)");
    run->add_flag("--no-timestamp", no_timestamp,
                  "suppress the timestamp header line");
    run->add_flag("--strict", strict,
                  "exit with code 3 if any cell is discordant");

    // charfn eval
    auto* charfn =
        app.add_subcommand("charfn", "characteristic-function machinery");
    charfn->require_subcommand(1);
    auto* ceval = charfn->add_subcommand(
        "eval", "jets of Psi, Theta and F at a point");
    double c_t = 0.5;
    std::uint64_t c_n = 2;
    ModelOpts c_model;
    ceval->add_option("--t", c_t, "evaluation point")->required();
    ceval->add_option("--n", c_n, "number of summands")->required();
    c_model.attach(ceval);

    // quad logosc
    auto* quad = app.add_subcommand("quad", "oscillatory quadrature");
    quad->require_subcommand(1);
    auto* logosc = quad->add_subcommand(
        "logosc", "log-oscillatory integral diagnostics");
    double q_M = 1000.0, q_upper = 0.5, q_p = 0.7;
    int q_r = 0, q_m = 0;
    logosc->add_option("--M", q_M, "oscillation scale")->required();
    logosc->add_option("--r", q_r, "power of ln t in the integrand");
    logosc->add_option("--m", q_m, "power of the characteristic function");
    logosc->add_option("--upper", q_upper, "upper endpoint");
    logosc->add_option("--p", q_p, "model weight when --m > 0");

    // invert
    auto* invert =
        app.add_subcommand("invert", "smoothed tail inversion at (n, N)");
    std::uint64_t i_n = 16;
    double i_N = 1000.0, i_g = 0.0;
    std::string i_far = "budgeted";
    ModelOpts i_model;
    SmootherOpts i_smoother;
    invert->add_option("--n", i_n, "number of summands")->required();
    invert->add_option("--N", i_N, "tail threshold")->required();
    invert->add_option("--g", i_g, "interval width (default N^2)");
    invert->add_option("--far-mode", i_far, "far endpoint handling")
        ->check(CLI::IsMember({"budgeted", "exact"}));
    i_model.attach(invert);
    i_smoother.attach(invert);

    // mc naive|bigjump|conv2
    auto* mc = app.add_subcommand("mc", "Monte Carlo estimators");
    mc->require_subcommand(1);
    std::uint64_t m_n = 16, m_trials = 1000000, m_seed = 12345;
    double m_N = 1000.0;
    int m_workers = 1;
    std::uint32_t m_stream = 0;
    bool m_force = false;
    ModelOpts m_model;

    auto* naive = mc->add_subcommand(
        "naive", "direct tail frequency over full sums");
    auto* bigjump = mc->add_subcommand(
        "bigjump", "conditioned single-big-jump estimator");
    auto* conv2 = mc->add_subcommand(
        "conv2", "two-fold convolution tail by quadrature");
    for (CLI::App* sub : {naive, bigjump}) {
        sub->add_option("--n", m_n, "number of summands")->required();
        sub->add_option("--N", m_N, "tail threshold")->required();
        sub->add_option("--trials", m_trials, "Monte Carlo trials");
        sub->add_option("--seed", m_seed, "RNG seed");
        sub->add_option("--workers", m_workers, "worker threads");
        sub->add_option("--stream", m_stream, "RNG stream index");
        m_model.attach(sub);
    }
    naive->add_flag("--force", m_force,
                    "run even when fewer than 10 tail hits are expected");
    conv2->add_option("--N", m_N, "tail threshold")->required();
    conv2->add_option("--p", m_model.p, "upper-tail weight p");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, out_override, no_timestamp, strict);
        if (charfn->parsed())
            return cmd_charfn_eval(c_t, c_n, c_model);
        if (quad->parsed())
            return cmd_quad_logosc(q_M, q_r, q_m, q_upper, q_p);
        if (invert->parsed())
            return cmd_invert(i_n, i_N, i_g, i_far, i_model, i_smoother);
        if (mc->parsed()) {
            const heavytail::TailModel model = m_model.model();
            if (naive->parsed()) {
                const heavytail::McEstimate est =
                    heavytail::naive_tail_estimate(model, m_n, m_N,
                                                   m_trials, m_seed,
                                                   m_workers, m_force,
                                                   m_stream);
                json j = mc_json(est, m_seed);
                j["estimator"] = "naive";
                std::cout << j.dump(2) << "\n";
            } else if (bigjump->parsed()) {
                const heavytail::McEstimate est =
                    heavytail::bigjump_tail_estimate(model, m_n, m_N,
                                                     m_trials, m_seed,
                                                     m_workers, m_stream);
                json j = mc_json(est, m_seed);
                j["estimator"] = "bigjump";
                std::cout << j.dump(2) << "\n";
            } else {
                json j;
                j["estimator"] = "conv2";
                j["N"] = m_N;
                j["p"] = model.p;
                j["value"] = heavytail::conv2_tail_prob(model, m_N);
                if (m_N > 2.0)
                    j["value_closed"] =
                        heavytail::conv2_tail_closed(model, m_N);
                std::cout << j.dump(2) << "\n";
            }
            return 0;
        }
    } catch (const heavytail::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
