#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "wavemc/errors.hpp"
#include "wavemc/experiments.hpp"

namespace wavemc {

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Smooth1d: return "smooth1d";
        case ExperimentKind::Jump1d: return "jump1d";
        case ExperimentKind::Channel2d: return "channel2d";
        case ExperimentKind::CostSweep: return "cost-sweep";
        case ExperimentKind::Graded: return "graded";
        case ExperimentKind::Convergence: return "convergence";
    }
    return "?";
}

std::string_view to_string(IntegratorChoice choice) {
    switch (choice) {
        case IntegratorChoice::Lf: return "lf";
        case IntegratorChoice::Lts: return "lts";
        case IntegratorChoice::Both: return "both";
    }
    return "?";
}

std::optional<ExperimentKind> experiment_from_string(std::string_view name) {
    for (ExperimentKind k : {ExperimentKind::Smooth1d, ExperimentKind::Jump1d,
                             ExperimentKind::Channel2d, ExperimentKind::CostSweep,
                             ExperimentKind::Graded, ExperimentKind::Convergence})
        if (name == to_string(k)) return k;
    return std::nullopt;
}

std::optional<IntegratorChoice> integrator_from_string(std::string_view name) {
    for (IntegratorChoice c : {IntegratorChoice::Lf, IntegratorChoice::Lts, IntegratorChoice::Both})
        if (name == to_string(c)) return c;
    return std::nullopt;
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.experiment = kind;
    switch (kind) {
        case ExperimentKind::Smooth1d:
            c.h0 = 1.0 / 16.0;
            c.fine_h = 1.0 / 256.0;
            c.final_time = 11.0;
            c.eps_list = {4e-3, 2e-3, 1e-3};
            c.max_level = 4;
            break;
        case ExperimentKind::Jump1d:
            c.h0 = 1.0 / 16.0;
            c.fine_h = 1.0 / 512.0;
            c.final_time = 6.0;
            c.eps_list = {4e-3, 2e-3, 1e-3};
            c.max_level = 4;
            break;
        case ExperimentKind::Channel2d:
            c.h0 = 1.0 / 60.0;
            c.fine_h = 7.6e-4;
            c.final_time = 1.0;
            c.eps_list = {5e-5};
            c.max_level = 3;
            break;
        case ExperimentKind::CostSweep:
            c.dim = 1;
            c.sweep_axis = "r";
            break;
        case ExperimentKind::Graded:
            c.dim = 2;
            c.graded_s = 2.0;
            break;
        case ExperimentKind::Convergence:
            c.final_time = 6.0;
            break;
    }
    return c;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        values.push_back(std::stod(item));
    }
    return values;
}

void validate(const ExperimentConfig& c) {
    auto fail = [](const std::string& message) { throw ConfigError("config: " + message); };
    if (c.nu < 0.0 || c.nu > 1.0) fail("nu must lie in [0,1]");
    if (c.safety <= 0.0 || c.safety > 1.0) fail("safety must lie in (0,1]");
    if (c.alpha < 1.0) fail("alpha must be >= 1");
    for (double e : c.eps_list)
        if (e <= 0.0) fail("eps values must be positive");
    if (c.grid_n < 2) fail("grid_n must be >= 2");
    if (c.workers < 1) fail("workers must be >= 1");
    if (c.max_level < 0) fail("max_level must be >= 0");
    if (c.initial_samples < 2) fail("initial_samples must be >= 2");
    if (c.bias_window < 1) fail("bias_window must be >= 1");
    const bool sampling = c.experiment == ExperimentKind::Smooth1d ||
                          c.experiment == ExperimentKind::Jump1d ||
                          c.experiment == ExperimentKind::Channel2d;
    if (sampling) {
        if (c.h0 <= 0.0 || c.fine_h <= 0.0) fail("h0 and fine_h must be positive");
        if (c.fine_h > c.h0) fail("fine_h must not exceed h0");
        if (c.final_time <= 0.0) fail("final_time must be positive");
        if (c.eps_list.empty()) fail("eps list must not be empty");
    }
    if (c.experiment == ExperimentKind::CostSweep) {
        if (c.sweep_axis != "r" && c.sweep_axis != "p0" && c.sweep_axis != "beta")
            fail("sweep_axis must be one of r, p0, beta");
        if (c.dim < 1 || c.dim > 3) fail("dim must be 1, 2 or 3");
        if (c.sweep_count < 2) fail("sweep_count must be >= 2");
    }
    if (c.experiment == ExperimentKind::Graded) {
        if (c.graded_s < 1.0) fail("graded_s must be >= 1");
        if (c.graded_m_max < 16) fail("graded_m_max must be >= 16");
        if (c.dim < 1 || c.dim > 3) fail("dim must be 1, 2 or 3");
    }
}

}  // namespace

ExperimentConfig parse_config_text(std::istream& in,
                                   std::optional<ExperimentKind> experiment_override) {
    std::map<std::string, std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config: expected key = value, got '" + line + "'");
        entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    ExperimentKind kind = ExperimentKind::Smooth1d;
    if (const auto it = entries.find("experiment"); it != entries.end()) {
        const auto parsed = experiment_from_string(it->second);
        if (!parsed) throw ConfigError("config: unknown experiment '" + it->second + "'");
        kind = *parsed;
    } else if (experiment_override) {
        kind = *experiment_override;
    } else {
        throw ConfigError("config: missing 'experiment'");
    }
    if (experiment_override) kind = *experiment_override;

    ExperimentConfig c = default_config(kind);
    std::vector<std::string> unknown;
    for (const auto& [key, value] : entries) {
        try {
            if (key == "experiment") continue;
            else if (key == "eps") c.eps_list = parse_double_list(value);
            else if (key == "integrator") {
                const auto parsed = integrator_from_string(value);
                if (!parsed) throw ConfigError("config: unknown integrator '" + value + "'");
                c.integrator = *parsed;
            }
            else if (key == "seed") c.seed = std::stoull(value);
            else if (key == "workers") c.workers = std::stoi(value);
            else if (key == "h0") c.h0 = std::stod(value);
            else if (key == "fine_h") c.fine_h = std::stod(value);
            else if (key == "final_time") c.final_time = std::stod(value);
            else if (key == "nu") c.nu = std::stod(value);
            else if (key == "safety") c.safety = std::stod(value);
            else if (key == "alpha") c.alpha = std::stod(value);
            else if (key == "max_level") c.max_level = std::stoi(value);
            else if (key == "grid_n") c.grid_n = std::stoi(value);
            else if (key == "initial_samples") c.initial_samples = std::stoi(value);
            else if (key == "bias_window") c.bias_window = std::stoi(value);
            else if (key == "out_dir") c.out_dir = value;
            else if (key == "plot") c.plot = (value == "true" || value == "1");
            else if (key == "sweep_axis") c.sweep_axis = value;
            else if (key == "sweep_lo") c.sweep_lo = std::stod(value);
            else if (key == "sweep_hi") c.sweep_hi = std::stod(value);
            else if (key == "sweep_count") c.sweep_count = std::stoi(value);
            else if (key == "dim") c.dim = std::stoi(value);
            else if (key == "graded_s") c.graded_s = std::stod(value);
            else if (key == "graded_m_max") c.graded_m_max = std::stoi(value);
            else unknown.push_back(key);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("config: bad value for '" + key + "': '" + value + "'");
        }
    }
    if (!unknown.empty()) {
        std::string message = "config: unknown keys:";
        for (const auto& k : unknown) message += " " + k;
        throw ConfigError(message);
    }
    validate(c);
    return c;
}

ExperimentConfig parse_config_file(const std::string& path,
                                   std::optional<ExperimentKind> experiment_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_config_text(in, experiment_override);
}

void emit_config(const ExperimentConfig& c, std::ostream& out) {
    out << std::setprecision(17);
    out << "experiment = " << to_string(c.experiment) << '\n';
    out << "eps = ";
    for (std::size_t i = 0; i < c.eps_list.size(); ++i)
        out << (i ? "," : "") << c.eps_list[i];
    out << '\n';
    out << "integrator = " << to_string(c.integrator) << '\n';
    out << "seed = " << c.seed << '\n';
    out << "workers = " << c.workers << '\n';
    out << "h0 = " << c.h0 << '\n';
    out << "fine_h = " << c.fine_h << '\n';
    out << "final_time = " << c.final_time << '\n';
    out << "nu = " << c.nu << '\n';
    out << "safety = " << c.safety << '\n';
    out << "alpha = " << c.alpha << '\n';
    out << "max_level = " << c.max_level << '\n';
    out << "grid_n = " << c.grid_n << '\n';
    out << "initial_samples = " << c.initial_samples << '\n';
    out << "bias_window = " << c.bias_window << '\n';
    out << "out_dir = " << c.out_dir << '\n';
    out << "plot = " << (c.plot ? "true" : "false") << '\n';
    out << "sweep_axis = " << c.sweep_axis << '\n';
    out << "sweep_lo = " << c.sweep_lo << '\n';
    out << "sweep_hi = " << c.sweep_hi << '\n';
    out << "sweep_count = " << c.sweep_count << '\n';
    out << "dim = " << c.dim << '\n';
    out << "graded_s = " << c.graded_s << '\n';
    out << "graded_m_max = " << c.graded_m_max << '\n';
}

}  // namespace wavemc
