#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wavemc/errors.hpp"
#include "wavemc/experiments.hpp"
#include "wavemc/svg_plot.hpp"

using namespace wavemc;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_CASE("defaults round-trip through the flat config format") {
    for (ExperimentKind kind : {ExperimentKind::Smooth1d, ExperimentKind::Jump1d,
                                ExperimentKind::Channel2d, ExperimentKind::CostSweep,
                                ExperimentKind::Graded, ExperimentKind::Convergence}) {
        const ExperimentConfig original = default_config(kind);
        std::stringstream text;
        emit_config(original, text);
        const ExperimentConfig parsed = parse_config_text(text, std::nullopt);
        CHECK(parsed.experiment == original.experiment);
        CHECK(parsed.eps_list == original.eps_list);
        CHECK(parsed.integrator == original.integrator);
        CHECK(parsed.seed == original.seed);
        CHECK(parsed.h0 == original.h0);
        CHECK(parsed.fine_h == original.fine_h);
        CHECK(parsed.final_time == original.final_time);
        CHECK(parsed.nu == original.nu);
        CHECK(parsed.safety == original.safety);
        CHECK(parsed.max_level == original.max_level);
        CHECK(parsed.grid_n == original.grid_n);
        CHECK(parsed.out_dir == original.out_dir);
        // a second round trip is byte-identical
        std::stringstream again;
        emit_config(parsed, again);
        std::stringstream first;
        emit_config(original, first);
        CHECK(again.str() == first.str());
    }
}

TEST_CASE("an empty config with an experiment override yields the defaults") {
    std::stringstream empty("# nothing here\n\n");
    const ExperimentConfig parsed = parse_config_text(empty, ExperimentKind::Jump1d);
    const ExperimentConfig defaults = default_config(ExperimentKind::Jump1d);
    CHECK(parsed.h0 == defaults.h0);
    CHECK(parsed.fine_h == defaults.fine_h);
    CHECK(parsed.eps_list == defaults.eps_list);
}

TEST_CASE("unknown keys are rejected by name") {
    std::stringstream text("experiment = smooth1d\nwavelength = 3\nturbo = on\n");
    try {
        parse_config_text(text, std::nullopt);
        CHECK(false);
    } catch (const ConfigError& err) {
        const std::string what = err.what();
        CHECK(what.find("wavelength") != std::string::npos);
        CHECK(what.find("turbo") != std::string::npos);
    }
}

TEST_CASE("out-of-range values are rejected") {
    std::stringstream bad_nu("experiment = smooth1d\nnu = 2\n");
    CHECK_THROWS_AS(parse_config_text(bad_nu, std::nullopt), ConfigError);
    std::stringstream bad_eps("experiment = smooth1d\neps = -0.1\n");
    CHECK_THROWS_AS(parse_config_text(bad_eps, std::nullopt), ConfigError);
    std::stringstream bad_fine("experiment = smooth1d\nfine_h = 0.5\nh0 = 0.0625\n");
    CHECK_THROWS_AS(parse_config_text(bad_fine, std::nullopt), ConfigError);
    std::stringstream bad_safety("experiment = jump1d\nsafety = 0\n");
    CHECK_THROWS_AS(parse_config_text(bad_safety, std::nullopt), ConfigError);
    std::stringstream missing("h0 = 0.1\n");
    CHECK_THROWS_AS(parse_config_text(missing, std::nullopt), ConfigError);
}

TEST_CASE("eps lists parse with commas") {
    std::stringstream text("experiment = smooth1d\neps = 4e-3, 2e-3,1e-3\n");
    const ExperimentConfig parsed = parse_config_text(text, std::nullopt);
    CHECK(parsed.eps_list == std::vector<double>{4e-3, 2e-3, 1e-3});
}

TEST_CASE("model parameters follow the experiment geometry") {
    const RefinementParams smooth = model_params(default_config(ExperimentKind::Smooth1d));
    CHECK(smooth.dim == 1);
    CHECK(smooth.p0 == 16);
    CHECK(smooth.fine_fraction == doctest::Approx(1.0 / 96.0));

    const RefinementParams jump = model_params(default_config(ExperimentKind::Jump1d));
    CHECK(jump.p0 == 32);

    const RefinementParams channel = model_params(default_config(ExperimentKind::Channel2d));
    CHECK(channel.dim == 2);
    CHECK(channel.p0 == 22);
    CHECK(channel.fine_fraction == doctest::Approx(4e-4 / 1.9004));
}

TEST_CASE("cost sweep experiment writes its table") {
    ExperimentConfig config = default_config(ExperimentKind::CostSweep);
    config.out_dir = "build/test_artifacts/sweep";
    config.sweep_count = 10;
    std::filesystem::remove_all(config.out_dir);
    std::stringstream log;
    CHECK(run_experiment(config, log) == 0);
    const std::string csv = slurp(std::filesystem::path(config.out_dir) / "cost_sweep_r.csv");
    CHECK(csv.find("r,speedup") != std::string::npos);
    CHECK(csv.find("# experiment = cost-sweep") != std::string::npos);
}

TEST_CASE("graded experiment writes both tables") {
    ExperimentConfig config = default_config(ExperimentKind::Graded);
    config.out_dir = "build/test_artifacts/graded";
    config.graded_m_max = 64;
    std::filesystem::remove_all(config.out_dir);
    std::stringstream log;
    CHECK(run_experiment(config, log) == 0);
    CHECK(std::filesystem::exists(std::filesystem::path(config.out_dir) / "graded_qopt.csv"));
    CHECK(std::filesystem::exists(std::filesystem::path(config.out_dir) / "graded_exponents.csv"));
}

TEST_CASE("convergence experiment reports second-order rates") {
    ExperimentConfig config = default_config(ExperimentKind::Convergence);
    config.out_dir = "build/test_artifacts/convergence";
    std::filesystem::remove_all(config.out_dir);
    std::stringstream log;
    CHECK(run_experiment(config, log) == 0);
    const std::string csv = slurp(std::filesystem::path(config.out_dir) / "convergence.csv");
    CHECK(csv.find("fitted rates") != std::string::npos);

    const ConvergenceStudy study = run_convergence_study(4, 0.9, 0.01);
    CHECK(study.rate_lf > 1.8);
    CHECK(study.rate_lf < 2.2);
    CHECK(study.rate_lts > 1.8);
    CHECK(study.rate_lts < 2.2);
}

TEST_CASE("sampling artifacts are byte-identical across reruns and worker counts") {
    ExperimentConfig config = default_config(ExperimentKind::Jump1d);
    config.integrator = IntegratorChoice::Lts;
    config.eps_list = {0.05};
    config.max_level = 2;
    config.initial_samples = 4;
    config.seed = 3;

    std::vector<std::string> artifacts;
    for (int run = 0; run < 3; ++run) {
        config.workers = run == 2 ? 4 : 1;
        config.out_dir = "build/test_artifacts/determinism_" + std::to_string(run);
        std::filesystem::remove_all(config.out_dir);
        std::stringstream log;
        REQUIRE(run_experiment(config, log) == 0);
        std::string combined;
        for (const char* name :
             {"jump1d_work.csv", "jump1d_lts_eps0_levels.csv", "jump1d_lts_eps0_estimate.csv"})
            combined += slurp(std::filesystem::path(config.out_dir) / name);
        artifacts.push_back(std::move(combined));
    }
    CHECK(artifacts[0] == artifacts[1]);
    CHECK(artifacts[0] == artifacts[2]);
}

TEST_CASE("svg plots are written with the series labels") {
    LinePlot plot;
    plot.title = "demo";
    plot.x_label = "x";
    plot.y_label = "y";
    plot.log_x = true;
    plot.log_y = true;
    plot.add("alpha", {1e-3, 1e-2, 1e-1}, {100.0, 10.0, 1.0});
    std::stringstream out;
    plot.write(out);
    const std::string svg = out.str();
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("alpha") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}
