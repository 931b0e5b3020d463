/// Multilevel sampling: coupled level differences, variance and bias
/// estimators, optimal sample allocation and the adaptive driver.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "wavemc/fem.hpp"
#include "wavemc/rng.hpp"

namespace wavemc {

struct MlmcConfig {
    double eps = 1e-3;     // root-MSE tolerance
    double alpha = 2.0;    // bias decay exponent, >= 1
    int initial_samples = 16;
    int initial_levels = 2;  // warm-up uses levels 0..2
    int max_level = 6;
    std::uint64_t master_seed = 0;
    int workers = 1;
    int bias_window = 1;  // levels entering the convergence test (1 = last only)
};

struct CostRecord {
    long matvec_full = 0;
    long matvec_fine = 0;
    long matvec_coarse = 0;
    long weighted_work = 0;  // counts weighted by the nnz of each product

    CostRecord& operator+=(const CostRecord& other);
};

struct SampleResult {
    QoIVector delta_q;  // Q_l - Q_{l-1}, or Q_0 on the coarsest level
    QoIVector q_fine;   // Q_l
    CostRecord cost;
};

/// What the driver needs from a concrete experiment.
struct MlmcProblem {
    OutputGrid grid;
    int max_levels_available = 0;  // levels 0..max_levels_available exist
    std::function<double(int)> model_cost;
    std::function<FieldSample(RngStream&)> draw;
    std::function<QoIVector(const FieldSample&, int level, CostRecord&)> solve;
};

/// One coupled sample: a single draw drives both solves of the pair, both
/// restricted to the common output grid before subtracting.
SampleResult sample_delta_q(const MlmcProblem& problem, int level, RngStream stream);

struct LevelAccumulator {
    int level = 0;
    long n_done = 0;
    double sum_norm2_dq = 0.0;  // sum ||dQ^(i)||^2
    double sum_norm2_q = 0.0;   // sum ||Q^(i)||^2
    QoIVector sum_dq;
    QoIVector sum_q;
    CostRecord cost;

    LevelAccumulator() = default;
    LevelAccumulator(int lvl, const OutputGrid& grid);
    void add(const SampleResult& sample);
    QoIVector mean_dq() const;
};

/// Unbiased estimator (sum ||dQ||^2 - ||sum dQ||^2 / N) / (N - 1), clamped at
/// zero. Throws NumericalError for fewer than two samples.
double estimate_variance(const LevelAccumulator& acc);

/// Single-level variance of Q itself, in the 1/N form.
double estimate_mc_variance(const LevelAccumulator& acc);

/// N_l = ceil((2/eps^2) sqrt(V_l/C_l) sum_l' sqrt(V_l' C_l')), at least
/// min_samples.
std::vector<long> optimal_samples(const std::vector<double>& variances,
                                  const std::vector<double>& costs, double eps,
                                  long min_samples = 2);

/// Squared-norm bias proxy ||mean dQ_L||^2 / (2^alpha - 1)^2; the estimator
/// has converged when this is below eps^2 / 2.
double bias_proxy_sq(const QoIVector& mean_dq_last, double alpha);

struct LevelStats {
    int level = 0;
    long n_samples = 0;
    double variance = 0.0;
    double mc_variance = 0.0;
    double mean_dq_norm = 0.0;
    double bias_proxy = 0.0;  // squared proxy, meaningful for level >= 1
    double model_cost = 0.0;
    CostRecord measured;
};

struct MlmcResult {
    QoIVector estimate;
    std::vector<LevelStats> levels;
    bool converged = false;
    double eps = 0.0;
    double total_variance = 0.0;     // sum V_l / N_l
    double bias = 0.0;               // squared proxy at the last level window
    double total_model_cost = 0.0;   // sum N_l C_l
    long measured_work = 0;

    int levels_used() const { return static_cast<int>(levels.size()) - 1; }
};

/// Adaptive driver: warm-up on the initial levels, then alternately enforce
/// the optimal sample counts and extend the hierarchy until the bias test
/// passes. Deterministic for fixed seed regardless of worker count.
MlmcResult run_mlmc(const MlmcProblem& problem, const MlmcConfig& config);

}  // namespace wavemc
