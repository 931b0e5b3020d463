#pragma once

#include <stdexcept>
#include <string>

namespace wavemc {

/// Invalid user input (config files, flags). CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure (instability, non-convergence, bad geometry). Exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InstabilityError : NumericalError {
    InstabilityError(const std::string& what, long step_index)
        : NumericalError(what), step(step_index) {}
    long step;
};

struct GeometryError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace wavemc
