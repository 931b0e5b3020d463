#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>

#include "wavemc/errors.hpp"
#include "wavemc/experiments.hpp"
#include "wavemc/svg_plot.hpp"

namespace wavemc {

namespace {

constexpr double kLambdaMargin = 1.05;  // headroom on the power-iteration estimate
constexpr double kEigTol = 1e-4;

void accumulate_cost(CostRecord& cost, const StepCounters& counters, const DiscreteOperator& op) {
    cost.matvec_full += counters.full;
    cost.matvec_fine += counters.fine;
    cost.matvec_coarse += counters.coarse;
    cost.weighted_work += counters.full * op.normalized.nnz() + counters.fine * op.a_fine.nnz() +
                          counters.coarse * op.a_coarse.nnz();
}

double stable_dt(const DiscreteOperator& op, Integrator kind, int substeps, double safety,
                 const std::vector<double>* warm_full, const std::vector<double>* warm_coarse,
                 CostRecord* cost) {
    const auto full = max_eigenvalue(op.normalized, kEigTol, 20000, warm_full);
    if (cost) cost->weighted_work += static_cast<long>(full.iterations) * op.normalized.nnz();
    if (kind == Integrator::LocalTimeStepping && op.n_fine > 0) {
        const auto coarse = coarse_max_eigenvalue(op, kEigTol, 20000, warm_coarse);
        if (cost) cost->weighted_work += static_cast<long>(coarse.iterations) * op.a_coarse.nnz();
        const double dt_coarse = 2.0 / std::sqrt(kLambdaMargin * coarse.lambda);
        const double dt_fine = substeps * 2.0 / std::sqrt(kLambdaMargin * full.lambda);
        return safety * std::min(dt_coarse, dt_fine);
    }
    return safety * 2.0 / std::sqrt(kLambdaMargin * full.lambda);
}

// ---------------------------------------------------------------------------
// 1D experiments (smooth and discontinuous random speed)

struct Level1d {
    Mesh1D mesh;
    int substeps = 1;
    std::vector<double> warm_full;
    std::vector<double> warm_coarse;
};

struct State1d {
    ExperimentConfig config;
    OutputGrid grid;
    std::vector<Level1d> levels;
    std::function<double(double)> u0;
};

std::shared_ptr<State1d> build_state_1d(const ExperimentConfig& config) {
    auto state = std::make_shared<State1d>();
    state->config = config;
    state->grid = OutputGrid{0.0, kDomain1dLength, config.grid_n};
    state->u0 = [](double x) { return std::exp(-(x - 3.0) * (x - 3.0) / 0.09); };

    const bool jump = config.experiment == ExperimentKind::Jump1d;
    const double anchor = jump ? 4.0 : 5.0;
    const Interval fine{anchor - config.h0, anchor};
    const MeshHierarchy hierarchy = build_hierarchy({0.0, kDomain1dLength}, config.h0, fine,
                                                    config.fine_h, config.max_level);

    for (int l = 0; l < hierarchy.n_levels(); ++l) {
        Level1d level;
        level.mesh = hierarchy.levels[l];
        level.substeps = hierarchy.ratios[l];
        const DiscreteOperator ref = assemble(level.mesh, [](double) { return 1.0; });
        level.warm_full = max_eigenvalue(ref.normalized, kEigTol, 20000).eigenvector;
        if (ref.n_fine > 0)
            level.warm_coarse = coarse_max_eigenvalue(ref, kEigTol, 20000).eigenvector;
        state->levels.push_back(std::move(level));
    }
    return state;
}

QoIVector solve_1d(const State1d& state, const FieldSample& field, int level, CostRecord& cost,
                   Integrator kind) {
    const Level1d& ctx = state.levels[level];
    const DiscreteOperator op =
        assemble(ctx.mesh, [&](double x) { return eval_speed_squared(field, x); });
    const double dt = stable_dt(op, kind, ctx.substeps, state.config.safety, &ctx.warm_full,
                                ctx.warm_coarse.empty() ? nullptr : &ctx.warm_coarse, &cost);
    const InitialData init = project_initial(ctx.mesh, state.u0, [](double) { return 0.0; }, op);

    RunOptions options;
    options.kind = kind;
    options.final_time = state.config.final_time;
    options.dt = dt;
    options.substeps = ctx.substeps;
    options.nu = state.config.nu;
    const RunResult run = run_wave(op, init, options);
    accumulate_cost(cost, run.counters, op);

    return restrict_to_grid(ctx.mesh, nodal_values(op, run.state.z_curr), state.grid);
}

// ---------------------------------------------------------------------------
// 2D narrow-channel experiment

struct Level2d {
    TriMesh reference;
    int substeps = 1;
    std::vector<double> warm_full;
    std::vector<double> warm_coarse;
};

struct State2d {
    ExperimentConfig config;
    OutputGrid grid;
    std::vector<Level2d> levels;
};

double bump_u0(double x, double y) {
    constexpr double radius = 0.2;
    const double dx = x - 0.5;
    const double rho2 = dx * dx + y * y;
    if (rho2 >= radius * radius) return 0.0;
    return std::exp(1.0 - radius * radius / (radius * radius - rho2));
}

std::shared_ptr<State2d> build_state_2d(const ExperimentConfig& config) {
    auto state = std::make_shared<State2d>();
    state->config = config;
    state->grid = OutputGrid{-kRectHalfHeight, kRectHalfHeight, config.grid_n};
    for (int l = 0; l <= config.max_level; ++l) {
        Level2d level;
        const double coarse = config.h0 / std::pow(2.0, l);
        level.reference = build_channel_mesh(std::max(coarse, config.fine_h), config.fine_h);
        level.substeps = std::max(1, static_cast<int>(std::ceil(coarse / config.fine_h - 1e-9)));
        const DiscreteOperator ref = assemble(level.reference);
        level.warm_full = max_eigenvalue(ref.normalized, kEigTol, 20000).eigenvector;
        if (ref.n_fine > 0)
            level.warm_coarse = coarse_max_eigenvalue(ref, kEigTol, 20000).eigenvector;
        state->levels.push_back(std::move(level));
    }
    return state;
}

QoIVector solve_2d(const State2d& state, const FieldSample& field, int level, CostRecord& cost,
                   Integrator kind) {
    const Level2d& ctx = state.levels[level];
    const ChannelGeometry geometry{field.channel_width};
    const TransformedMesh transformed = apply_channel_transform(ctx.reference, geometry);
    const DiscreteOperator op = assemble(transformed.mesh);
    const double dt = stable_dt(op, kind, ctx.substeps, state.config.safety, &ctx.warm_full,
                                ctx.warm_coarse.empty() ? nullptr : &ctx.warm_coarse, &cost);
    const InitialData init =
        project_initial(transformed.mesh, bump_u0, [](double, double) { return 0.0; }, op);

    RunOptions options;
    options.kind = kind;
    options.final_time = state.config.final_time;
    options.dt = dt;
    options.substeps = ctx.substeps;
    options.nu = state.config.nu;
    const RunResult run = run_wave(op, init, options);
    accumulate_cost(cost, run.counters, op);

    return extract_line_qoi(transformed.mesh, nodal_values(op, run.state.z_curr), -0.4,
                            state.grid);
}

}  // namespace

RefinementParams model_params(const ExperimentConfig& config) {
    RefinementParams params;
    params.h0 = config.h0;
    params.degree = 1;
    params.final_time = config.final_time;
    params.p0 = std::max(1.0, std::ceil(config.h0 / config.fine_h - 1e-9));
    if (config.experiment == ExperimentKind::Channel2d) {
        params.dim = 2;
        const double channel_area = 2.0 * kChannelHalfLength * kChannelReferenceWidth;
        params.fine_fraction =
            channel_area / (2.0 * kRectWidth * 2.0 * kRectHalfHeight + channel_area);
    } else {
        params.dim = 1;
        params.fine_fraction = config.h0 / kDomain1dLength;  // the refined window has width h0
    }
    return params;
}

MlmcProblem make_problem(const ExperimentConfig& config, Integrator kind) {
    MlmcProblem problem;
    const RefinementParams params = model_params(config);
    problem.model_cost = [params, kind](int level) {
        return kind == Integrator::Leapfrog ? cost_lf_level(params, level)
                                            : cost_lts_level(params, level);
    };

    switch (config.experiment) {
        case ExperimentKind::Smooth1d: {
            auto state = build_state_1d(config);
            problem.grid = state->grid;
            problem.max_levels_available = static_cast<int>(state->levels.size()) - 1;
            problem.draw = [](RngStream& stream) { return sample_kl(stream); };
            problem.solve = [state, kind](const FieldSample& field, int level, CostRecord& cost) {
                return solve_1d(*state, field, level, cost, kind);
            };
            return problem;
        }
        case ExperimentKind::Jump1d: {
            auto state = build_state_1d(config);
            problem.grid = state->grid;
            problem.max_levels_available = static_cast<int>(state->levels.size()) - 1;
            const double h0 = config.h0;
            problem.draw = [h0](RngStream& stream) { return sample_jump(stream, h0); };
            problem.solve = [state, kind](const FieldSample& field, int level, CostRecord& cost) {
                return solve_1d(*state, field, level, cost, kind);
            };
            return problem;
        }
        case ExperimentKind::Channel2d: {
            auto state = build_state_2d(config);
            problem.grid = state->grid;
            problem.max_levels_available = static_cast<int>(state->levels.size()) - 1;
            problem.draw = [](RngStream& stream) { return sample_width(stream); };
            problem.solve = [state, kind](const FieldSample& field, int level, CostRecord& cost) {
                return solve_2d(*state, field, level, cost, kind);
            };
            return problem;
        }
        default:
            throw ConfigError("make_problem: not a sampling experiment");
    }
}

// ---------------------------------------------------------------------------
// manufactured convergence study

namespace {

double standing_wave_error(const Mesh1D& mesh, const DiscreteOperator& op,
                           std::span<const double> z, double time) {
    const double k = std::numbers::pi / 6.0;
    const auto u = nodal_values(op, z);
    const double phase = std::cos(k * time);
    double err2 = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double lo = mesh.vertices[e], hi = mesh.vertices[e + 1];
        const double h = hi - lo;
        for (double x : {0.5 * (lo + hi) - 0.5 * h / std::sqrt(3.0),
                         0.5 * (lo + hi) + 0.5 * h / std::sqrt(3.0)}) {
            const double t = (x - lo) / h;
            const double uh = (1.0 - t) * u[e] + t * u[e + 1];
            const double exact = std::cos(k * x) * phase;
            err2 += 0.5 * h * (uh - exact) * (uh - exact);
        }
    }
    return std::sqrt(err2);
}

}  // namespace

ConvergenceStudy run_convergence_study(int refinements, double safety, double nu) {
    ConvergenceStudy study;
    const double k = std::numbers::pi / 6.0;
    const auto u0 = [k](double x) { return std::cos(k * x); };
    const auto v0 = [](double) { return 0.0; };
    const double final_time = 6.0;

    for (int j = 0; j < refinements; ++j) {
        const double h = 0.25 / std::pow(2.0, j);
        study.h.push_back(h);

        // standard stepping on the uniform mesh
        {
            const Mesh1D mesh = build_refined_interval({0.0, kDomain1dLength}, h, std::nullopt, 0.0);
            const DiscreteOperator op = assemble(mesh, [](double) { return 1.0; });
            const double dt = stable_dt(op, Integrator::Leapfrog, 1, safety, nullptr, nullptr, nullptr);
            const InitialData init = project_initial(mesh, u0, v0, op);
            RunOptions options;
            options.final_time = final_time;
            options.dt = dt;
            const RunResult run = run_wave(op, init, options);
            study.error_lf.push_back(standing_wave_error(mesh, op, run.state.z_curr, final_time));
        }
        // local stepping with four substeps on a selected band; equal element
        // sizes keep the measurement free of the size-jump consistency defect
        // of the lumped interface
        {
            const Mesh1D mesh =
                build_refined_interval({0.0, kDomain1dLength}, h, Interval{4.5, 5.0}, h);
            const DiscreteOperator op = assemble(mesh, [](double) { return 1.0; });
            const double dt =
                stable_dt(op, Integrator::LocalTimeStepping, 4, safety, nullptr, nullptr, nullptr);
            const InitialData init = project_initial(mesh, u0, v0, op);
            RunOptions options;
            options.kind = Integrator::LocalTimeStepping;
            options.final_time = final_time;
            options.dt = dt;
            options.substeps = 4;
            options.nu = nu;
            const RunResult run = run_wave(op, init, options);
            study.error_lts.push_back(standing_wave_error(mesh, op, run.state.z_curr, final_time));
        }
    }
    study.rate_lf = fit_log_slope(study.h, study.error_lf);
    study.rate_lts = fit_log_slope(study.h, study.error_lts);
    return study;
}

// ---------------------------------------------------------------------------
// artifact files

namespace {

void write_header(std::ostream& out, const ExperimentConfig& config) {
    out << "# " << kVersion << '\n';
    std::ostringstream echo;
    emit_config(config, echo);
    std::istringstream lines(echo.str());
    std::string line;
    while (std::getline(lines, line)) {
        // workers and out_dir are runtime knobs that do not define the
        // experiment; leaving them out keeps artifacts byte-identical across
        // worker counts and output locations
        if (line.rfind("workers", 0) == 0 || line.rfind("out_dir", 0) == 0) continue;
        out << "# " << line << '\n';
    }
}

std::ofstream open_artifact(const ExperimentConfig& config, const std::string& name) {
    std::filesystem::create_directories(config.out_dir);
    const auto path = std::filesystem::path(config.out_dir) / name;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file " + path.string());
    out << std::setprecision(17);
    write_header(out, config);
    return out;
}

void write_levels_csv(const ExperimentConfig& config, const std::string& name,
                      const MlmcResult& result) {
    auto out = open_artifact(config, name);
    out << "level,n_samples,variance,mc_variance,mean_dq_norm,bias_proxy,model_cost,"
           "matvec_full,matvec_fine,matvec_coarse,weighted_work\n";
    for (const auto& s : result.levels)
        out << s.level << ',' << s.n_samples << ',' << s.variance << ',' << s.mc_variance << ','
            << s.mean_dq_norm << ',' << s.bias_proxy << ',' << s.model_cost << ','
            << s.measured.matvec_full << ',' << s.measured.matvec_fine << ','
            << s.measured.matvec_coarse << ',' << s.measured.weighted_work << '\n';
}

void write_estimate_csv(const ExperimentConfig& config, const std::string& name,
                        const MlmcResult& result) {
    auto out = open_artifact(config, name);
    out << "point,value\n";
    for (int i = 0; i < result.estimate.grid.n; ++i)
        out << result.estimate.grid.point(i) << ',' << result.estimate.values[i] << '\n';
}

std::string eps_tag(std::size_t index) { return "eps" + std::to_string(index); }

int run_sampling_experiment(const ExperimentConfig& config, std::ostream& log) {
    std::vector<Integrator> kinds;
    if (config.integrator != IntegratorChoice::Lts) kinds.push_back(Integrator::Leapfrog);
    if (config.integrator != IntegratorChoice::Lf) kinds.push_back(Integrator::LocalTimeStepping);

    auto work = open_artifact(config, std::string(to_string(config.experiment)) + "_work.csv");
    work << "eps,integrator,converged,levels_used,total_model_cost,measured_work,"
            "total_variance,bias_proxy\n";

    LinePlot plot;
    plot.title = std::string(to_string(config.experiment)) + ": sampling cost vs tolerance";
    plot.x_label = "eps";
    plot.y_label = "model cost";
    plot.log_x = true;
    plot.log_y = true;

    for (Integrator kind : kinds) {
        const MlmcProblem problem = make_problem(config, kind);
        const std::string integrator_name(
            to_string(kind == Integrator::Leapfrog ? IntegratorChoice::Lf : IntegratorChoice::Lts));
        std::vector<double> eps_points, cost_points;
        for (std::size_t k = 0; k < config.eps_list.size(); ++k) {
            MlmcConfig mlmc;
            mlmc.eps = config.eps_list[k];
            mlmc.alpha = config.alpha;
            mlmc.initial_samples = config.initial_samples;
            mlmc.max_level = config.max_level;
            mlmc.master_seed = config.seed;
            mlmc.workers = config.workers;
            mlmc.bias_window = config.bias_window;

            const MlmcResult result = run_mlmc(problem, mlmc);
            log << to_string(config.experiment) << ' ' << integrator_name << " eps=" << mlmc.eps
                << (result.converged ? " converged" : " NOT converged") << ", levels 0.."
                << result.levels_used() << ", model cost " << result.total_model_cost << '\n';

            const std::string stem =
                std::string(to_string(config.experiment)) + "_" + integrator_name + "_" + eps_tag(k);
            write_levels_csv(config, stem + "_levels.csv", result);
            write_estimate_csv(config, stem + "_estimate.csv", result);
            work << mlmc.eps << ',' << integrator_name << ',' << (result.converged ? 1 : 0) << ','
                 << result.levels_used() << ',' << result.total_model_cost << ','
                 << result.measured_work << ',' << result.total_variance << ',' << result.bias
                 << '\n';
            eps_points.push_back(mlmc.eps);
            cost_points.push_back(result.total_model_cost);
        }
        plot.add(integrator_name, std::move(eps_points), std::move(cost_points));
    }

    if (config.plot && !config.eps_list.empty() && config.eps_list.size() > 1) {
        const auto path = std::filesystem::path(config.out_dir) /
                          (std::string(to_string(config.experiment)) + "_work.svg");
        plot.write_file(path.string());
    }
    return 0;
}

int run_cost_sweep(const ExperimentConfig& config, std::ostream& log) {
    SweepSpec spec;
    spec.dim = config.dim;
    // one fixed parameter set per dimension
    switch (config.dim) {
        case 1: spec.fine_fraction = 1e-2; spec.p0 = 13; spec.beta = 4; break;
        case 2: spec.fine_fraction = 1e-4; spec.p0 = 19; spec.beta = 6; break;
        default: spec.fine_fraction = 1e-6; spec.p0 = 27; spec.beta = 8; break;
    }
    spec.count = config.sweep_count;
    if (config.sweep_axis == "r") {
        spec.axis = SweepAxis::FineFraction;
        spec.lo = 1e-6;
        spec.hi = 1.0;
        spec.log_axis = true;
    } else if (config.sweep_axis == "p0") {
        spec.axis = SweepAxis::RefinementRatio;
        spec.lo = 2.0;
        spec.hi = 256.0;
        spec.log_axis = true;
    } else {
        spec.axis = SweepAxis::VarianceDecay;
        spec.lo = 0.5;
        spec.hi = 10.0;
        spec.log_axis = false;
    }
    if (config.sweep_lo > 0.0) spec.lo = config.sweep_lo;
    if (config.sweep_hi > 0.0) spec.hi = config.sweep_hi;

    const auto rows = sweep_speedup(spec);
    auto out = open_artifact(config, "cost_sweep_" + config.sweep_axis + ".csv");
    out << config.sweep_axis << ",speedup\n";
    for (const auto& row : rows) out << row.axis_value << ',' << row.speedup << '\n';
    log << "cost sweep over " << config.sweep_axis << ": " << rows.size() << " rows\n";

    if (config.plot) {
        LinePlot plot;
        plot.title = "speed-up vs " + config.sweep_axis + " (d=" + std::to_string(config.dim) + ")";
        plot.x_label = config.sweep_axis;
        plot.y_label = "speed-up";
        plot.log_x = spec.log_axis;
        std::vector<double> xs, ys;
        for (const auto& row : rows) {
            xs.push_back(row.axis_value);
            ys.push_back(row.speedup);
        }
        plot.add("speed-up", std::move(xs), std::move(ys));
        plot.write_file((std::filesystem::path(config.out_dir) /
                         ("cost_sweep_" + config.sweep_axis + ".svg"))
                            .string());
    }
    return 0;
}

int run_graded_analysis(const ExperimentConfig& config, std::ostream& log) {
    {
        auto out = open_artifact(config, "graded_qopt.csv");
        out << "m,q_opt,cost_lf,cost_lts_opt,single_solve_speedup\n";
        for (long m = 16; m <= config.graded_m_max; m *= 2) {
            const long q = optimal_q(m, config.graded_s, config.dim);
            const double lf = graded_cost_lf(static_cast<double>(m), config.graded_s, config.dim);
            const double lts = graded_cost_lts(static_cast<double>(m), config.graded_s, config.dim,
                                               static_cast<double>(q));
            out << m << ',' << q << ',' << lf << ',' << lts << ',' << lf / lts << '\n';
        }
    }
    {
        auto out = open_artifact(config, "graded_exponents.csv");
        out << "beta,gamma_lf,gamma_lts,cost_exponent_lf,log_sq_lf,cost_exponent_lts,log_sq_lts,"
               "speedup_exponent\n";
        const double gamma_lf = graded_gamma_lf(config.graded_s, config.dim);
        const double gamma_lts = graded_gamma_lts(config.graded_s, config.dim);
        const int degree = 1;
        for (double beta = 0.5; beta <= gamma_lf + 2.0; beta += 0.25) {
            const auto lf = mlmc_cost_exponent(degree + 1, beta, gamma_lf);
            const auto lts = mlmc_cost_exponent(degree + 1, beta, gamma_lts);
            out << beta << ',' << gamma_lf << ',' << gamma_lts << ',' << lf.exponent << ','
                << (lf.log_squared ? 1 : 0) << ',' << lts.exponent << ','
                << (lts.log_squared ? 1 : 0) << ','
                << graded_speedup_exponent(beta, config.graded_s, config.dim, degree) << '\n';
        }
    }
    log << "graded analysis written for s=" << config.graded_s << ", d=" << config.dim << '\n';
    return 0;
}

int run_convergence_experiment(const ExperimentConfig& config, std::ostream& log) {
    const ConvergenceStudy study = run_convergence_study(4, config.safety, config.nu);
    auto out = open_artifact(config, "convergence.csv");
    out << "# fitted rates: lf " << study.rate_lf << ", lts " << study.rate_lts << '\n';
    out << "h,error_lf,error_lts\n";
    for (std::size_t i = 0; i < study.h.size(); ++i)
        out << study.h[i] << ',' << study.error_lf[i] << ',' << study.error_lts[i] << '\n';
    log << "convergence rates: lf " << study.rate_lf << ", lts " << study.rate_lts << '\n';
    return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
    try {
        switch (config.experiment) {
            case ExperimentKind::Smooth1d:
            case ExperimentKind::Jump1d:
            case ExperimentKind::Channel2d:
                return run_sampling_experiment(config, log);
            case ExperimentKind::CostSweep:
                return run_cost_sweep(config, log);
            case ExperimentKind::Graded:
                return run_graded_analysis(config, log);
            case ExperimentKind::Convergence:
                return run_convergence_experiment(config, log);
        }
        throw ConfigError("run_experiment: unknown experiment");
    } catch (const ConfigError& err) {
        log << "config error: " << err.what() << '\n';
        return 2;
    } catch (const NumericalError& err) {
        log << "numerical failure: " << err.what() << '\n';
        return 3;
    }
}

}  // namespace wavemc
