// Command-line driver: runs the sampling experiments, the cost-model sweeps,
// the graded-mesh analysis and the convergence study from flags or a flat
// key = value config file.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "wavemc/errors.hpp"
#include "wavemc/experiments.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string experiment;
    std::string integrator;
    std::vector<double> eps;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<double> h0, fine_h, final_time, nu, safety, alpha;
    std::optional<int> max_level, grid_n, initial_samples, bias_window;
    std::string out_dir;
    bool plot = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--experiment", flags.experiment,
                    "smooth1d | jump1d | channel2d | cost-sweep | graded | convergence");
    cmd->add_option("--config", flags.config_path, "flat key = value config file");
    cmd->add_option("--eps", flags.eps, "root-MSE tolerance list");
    cmd->add_option("--integrator", flags.integrator, "lf | lts | both");
    cmd->add_option("--seed", flags.seed, "master seed (default 0)");
    cmd->add_option("--workers", flags.workers, "worker threads (default: hardware)");
    cmd->add_option("--h0", flags.h0, "coarsest mesh size");
    cmd->add_option("--fine-h", flags.fine_h, "fine-region mesh size");
    cmd->add_option("--final-time", flags.final_time, "simulation end time");
    cmd->add_option("--nu", flags.nu, "stabilization parameter in [0,1]");
    cmd->add_option("--safety", flags.safety, "CFL safety factor in (0,1]");
    cmd->add_option("--alpha", flags.alpha, "bias decay exponent (>= 1)");
    cmd->add_option("--max-level", flags.max_level, "finest level index");
    cmd->add_option("--grid-n", flags.grid_n, "output grid points");
    cmd->add_option("--initial-samples", flags.initial_samples, "warm-up samples per level");
    cmd->add_option("--bias-window", flags.bias_window, "levels in the convergence test");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_flag("--plot", flags.plot, "emit SVG plots");
}

wavemc::ExperimentConfig resolve(const CommonFlags& flags,
                                 std::optional<wavemc::ExperimentKind> default_kind) {
    std::optional<wavemc::ExperimentKind> kind = default_kind;
    if (!flags.experiment.empty()) {
        kind = wavemc::experiment_from_string(flags.experiment);
        if (!kind) throw wavemc::ConfigError("unknown experiment '" + flags.experiment + "'");
    }

    wavemc::ExperimentConfig config;
    if (!flags.config_path.empty()) {
        config = wavemc::parse_config_file(flags.config_path, kind);
    } else if (kind) {
        config = wavemc::default_config(*kind);
    } else {
        throw wavemc::ConfigError("need --experiment or --config");
    }

    if (!flags.eps.empty()) config.eps_list = flags.eps;
    if (!flags.integrator.empty()) {
        const auto parsed = wavemc::integrator_from_string(flags.integrator);
        if (!parsed) throw wavemc::ConfigError("unknown integrator '" + flags.integrator + "'");
        config.integrator = *parsed;
    }
    if (flags.seed) config.seed = *flags.seed;
    config.workers = flags.workers ? *flags.workers
                                   : std::max(1u, std::thread::hardware_concurrency());
    if (flags.h0) config.h0 = *flags.h0;
    if (flags.fine_h) config.fine_h = *flags.fine_h;
    if (flags.final_time) config.final_time = *flags.final_time;
    if (flags.nu) config.nu = *flags.nu;
    if (flags.safety) config.safety = *flags.safety;
    if (flags.alpha) config.alpha = *flags.alpha;
    if (flags.max_level) config.max_level = *flags.max_level;
    if (flags.grid_n) config.grid_n = *flags.grid_n;
    if (flags.initial_samples) config.initial_samples = *flags.initial_samples;
    if (flags.bias_window) config.bias_window = *flags.bias_window;
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (flags.plot) config.plot = true;

    // re-validate after overrides via the config round trip
    std::stringstream echo;
    wavemc::emit_config(config, echo);
    return wavemc::parse_config_text(echo, config.experiment);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multilevel sampling for wave equations with random coefficients"};
    app.require_subcommand(0, 1);

    CommonFlags run_flags, sweep_flags, graded_flags, conv_flags, defaults_flags;

    auto* run_cmd = app.add_subcommand("run", "run a sampling experiment");
    add_common(run_cmd, run_flags);

    auto* sweep_cmd = app.add_subcommand("sweep", "cost-model speed-up sweeps");
    add_common(sweep_cmd, sweep_flags);
    int sweep_dim = 1, sweep_count = 60;
    std::string sweep_axis = "r";
    double sweep_lo = 0.0, sweep_hi = 0.0;
    sweep_cmd->add_option("--axis", sweep_axis, "r | p0 | beta");
    sweep_cmd->add_option("--dim", sweep_dim, "spatial dimension 1..3");
    sweep_cmd->add_option("--count", sweep_count, "number of sweep points");
    sweep_cmd->add_option("--lo", sweep_lo, "axis lower bound");
    sweep_cmd->add_option("--hi", sweep_hi, "axis upper bound");

    auto* graded_cmd = app.add_subcommand("graded", "graded-mesh cost analysis");
    add_common(graded_cmd, graded_flags);
    int graded_dim = 2, graded_m_max = 4096;
    double graded_s = 2.0;
    graded_cmd->add_option("--grading", graded_s, "grading exponent s >= 1");
    graded_cmd->add_option("--dim", graded_dim, "spatial dimension 1..3");
    graded_cmd->add_option("--m-max", graded_m_max, "largest layer count (powers of two from 16)");

    auto* conv_cmd = app.add_subcommand("convergence", "manufactured-solution convergence study");
    add_common(conv_cmd, conv_flags);

    auto* defaults_cmd = app.add_subcommand("emit-defaults", "print the default config");
    defaults_cmd->add_option("--experiment", defaults_flags.experiment, "experiment name")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (defaults_cmd->parsed()) {
            const auto kind = wavemc::experiment_from_string(defaults_flags.experiment);
            if (!kind)
                throw wavemc::ConfigError("unknown experiment '" + defaults_flags.experiment + "'");
            wavemc::emit_config(wavemc::default_config(*kind), std::cout);
            return 0;
        }
        if (run_cmd->parsed())
            return wavemc::run_experiment(resolve(run_flags, std::nullopt), std::cout);
        if (sweep_cmd->parsed()) {
            auto config = resolve(sweep_flags, wavemc::ExperimentKind::CostSweep);
            config.sweep_axis = sweep_axis;
            config.dim = sweep_dim;
            config.sweep_count = sweep_count;
            config.sweep_lo = sweep_lo;
            config.sweep_hi = sweep_hi;
            return wavemc::run_experiment(config, std::cout);
        }
        if (graded_cmd->parsed()) {
            auto config = resolve(graded_flags, wavemc::ExperimentKind::Graded);
            config.graded_s = graded_s;
            config.dim = graded_dim;
            config.graded_m_max = graded_m_max;
            return wavemc::run_experiment(config, std::cout);
        }
        if (conv_cmd->parsed())
            return wavemc::run_experiment(resolve(conv_flags, wavemc::ExperimentKind::Convergence),
                                          std::cout);
        std::cout << app.help();
        return 0;
    } catch (const wavemc::ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return 2;
    } catch (const wavemc::NumericalError& err) {
        std::cerr << "numerical failure: " << err.what() << '\n';
        return 3;
    }
}
