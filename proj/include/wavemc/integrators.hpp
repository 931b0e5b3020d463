/// Explicit time integration for z'' + A z = F: the second-order leapfrog
/// scheme and its stabilized local-time-stepping variant, which advances the
/// selected (fine) DOFs with p substeps per global step.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "wavemc/fem.hpp"

namespace wavemc {

/// Stabilization constants built from Chebyshev polynomials of the first kind.
///   delta = 1 + nu / p^2
///   omega = 2 T_p'(delta) / T_p(delta)
///   beta_int[k-1]  = T_{k-1}(delta) / T_{k+1}(delta),  k = 1..p-1
///   beta_half[k-1] = T_k(delta)     / T_{k+1}(delta),  k = 1..p-1
/// For nu = 0: delta = 1, every beta = 1 and omega = 2 p^2.
struct ChebyshevConstants {
    int p = 1;
    double nu = 0.0;
    double delta = 1.0;
    double omega = 2.0;
    std::vector<double> beta_int;
    std::vector<double> beta_half;
};

ChebyshevConstants chebyshev_constants(int p, double nu);
/// Same constants with delta pinned directly (diagnostics and tests).
ChebyshevConstants chebyshev_constants_with_delta(int p, double delta);

struct WaveState {
    std::vector<double> z_prev;
    std::vector<double> z_curr;
    double t = 0.0;
    double dt = 0.0;
    long step = 0;
};

/// Matrix-vector products by operator part, counted per integrator run.
struct StepCounters {
    long full = 0;    // products with A
    long fine = 0;    // products with A P
    long coarse = 0;  // products with A (I - P)
};

struct StepWorkspace {
    std::vector<double> w;
    std::vector<double> aq;
    std::vector<double> az_fine;
    std::vector<double> q_prev;
    std::vector<double> q_curr;
    std::vector<double> forcing;
};

/// Writes F~(t) into the output span.
using ForcingFn = std::function<void(double, std::span<double>)>;

/// Start-up step: z1 = z0 + dt M^{1/2} v0 + dt^2/2 (F0 - A z0).
WaveState leapfrog_init(const DiscreteOperator& op, const InitialData& data, double dt,
                        const ForcingFn* forcing, StepCounters& counters, StepWorkspace& ws);

/// z_{n+1} = 2 z_n - z_{n-1} + dt^2 (F_n - A z_n); one product with A.
void leapfrog_step(const DiscreteOperator& op, WaveState& state, const ForcingFn* forcing,
                   StepCounters& counters, StepWorkspace& ws);

/// One global step of the stabilized scheme: p substeps on the selected DOFs,
/// a single product with A (I - P) and p products with A P. Zero forcing.
void lts_step(const DiscreteOperator& op, WaveState& state, const ChebyshevConstants& consts,
              StepCounters& counters, StepWorkspace& ws);

/// E = 1/2 ||(z_curr - z_prev)/dt||^2 + 1/2 <A z_curr, z_prev>; conserved
/// exactly by leapfrog for zero forcing within the CFL bound.
double discrete_energy(const CsrMatrix& a, std::span<const double> z_prev,
                       std::span<const double> z_curr, double dt);
double discrete_energy(const DiscreteOperator& op, const WaveState& state);

enum class Integrator { Leapfrog, LocalTimeStepping };

struct RunOptions {
    Integrator kind = Integrator::Leapfrog;
    double final_time = 0.0;
    double dt = 0.0;  // requested; reduced so that n_steps * dt == final_time
    int substeps = 1;
    double nu = 0.01;
    const ForcingFn* forcing = nullptr;  // leapfrog only
    std::function<void(const WaveState&)> snapshot;
    long snapshot_every = 0;
};

struct RunResult {
    WaveState state;
    StepCounters counters;
    long n_steps = 0;
    double dt = 0.0;
};

/// Advances the initial data to final_time. Throws InstabilityError when the
/// state leaves the finite range.
RunResult run_wave(const DiscreteOperator& op, const InitialData& data, const RunOptions& options);

}  // namespace wavemc
