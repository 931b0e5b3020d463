/// Experiment orchestration: the three sampling experiments (smooth 1D field,
/// discontinuous 1D field, 2D narrow channel), the cost-model sweeps, graded
/// analysis and the manufactured convergence study, all driven from a flat
/// key = value config.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wavemc/cost_model.hpp"
#include "wavemc/integrators.hpp"
#include "wavemc/mlmc.hpp"

namespace wavemc {

inline constexpr const char* kVersion = "wavemc 0.1.0";

enum class ExperimentKind { Smooth1d, Jump1d, Channel2d, CostSweep, Graded, Convergence };
enum class IntegratorChoice { Lf, Lts, Both };

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Smooth1d;
    std::vector<double> eps_list;
    IntegratorChoice integrator = IntegratorChoice::Both;
    std::uint64_t seed = 0;
    int workers = 1;

    double h0 = 0.0;
    double fine_h = 0.0;
    double final_time = 0.0;
    double nu = 0.01;
    double safety = 0.9;
    double alpha = 2.0;
    int max_level = 4;
    int grid_n = 512;
    int initial_samples = 16;
    int bias_window = 1;

    std::string out_dir = "out";
    bool plot = false;

    // cost-sweep and graded-analysis parameters
    std::string sweep_axis = "r";  // r | p0 | beta
    double sweep_lo = 0.0;         // 0 = use the axis default
    double sweep_hi = 0.0;
    int sweep_count = 60;
    int dim = 1;
    double graded_s = 2.0;
    int graded_m_max = 4096;
};

ExperimentConfig default_config(ExperimentKind kind);

std::string_view to_string(ExperimentKind kind);
std::string_view to_string(IntegratorChoice choice);
std::optional<ExperimentKind> experiment_from_string(std::string_view name);
std::optional<IntegratorChoice> integrator_from_string(std::string_view name);

/// Parse a flat key = value config ('#' comments). Unknown keys are an error
/// listing the offenders; values outside their validity ranges are rejected.
ExperimentConfig parse_config_text(std::istream& in,
                                   std::optional<ExperimentKind> experiment_override);
ExperimentConfig parse_config_file(const std::string& path,
                                   std::optional<ExperimentKind> experiment_override);
void emit_config(const ExperimentConfig& config, std::ostream& out);

/// Cost-model parameters implied by an experiment's geometry.
RefinementParams model_params(const ExperimentConfig& config);

/// Sampling problem for the experiment, with per-level contexts built
/// eagerly. Valid for Smooth1d, Jump1d and Channel2d.
MlmcProblem make_problem(const ExperimentConfig& config, Integrator kind);

struct ConvergenceStudy {
    std::vector<double> h;
    std::vector<double> error_lf;
    std::vector<double> error_lts;
    double rate_lf = 0.0;
    double rate_lts = 0.0;
};

/// Manufactured standing wave cos(pi x / 6) cos(pi t / 6) on [0,6] with unit
/// speed: L2 errors at the final period and fitted spatial rates.
ConvergenceStudy run_convergence_study(int refinements = 4, double safety = 0.9, double nu = 0.01);

/// Runs the configured experiment and writes its artifact files. Returns the
/// process exit status: 0 success, 2 config error, 3 numerical failure.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace wavemc
