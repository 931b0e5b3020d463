/// Closed-form cost models for explicit wave solves on locally refined mesh
/// hierarchies: per-level and total sampling costs with standard or local
/// time-stepping, the induced speed-up, graded-mesh costs with the optimal
/// substep-region size, and the asymptotic cost exponents.
///
/// All model constants of proportionality are dropped (set to one); the
/// meaningful outputs are ratios and exponents.
#pragma once

#include <string>
#include <vector>

namespace wavemc {

struct RefinementParams {
    int dim = 1;                // d
    double fine_fraction = 0;   // r, relative volume of the refined region
    double p0 = 1;              // coarse-to-fine size ratio on level 0
    double h0 = 1.0;            // coarsest mesh size
    int degree = 1;             // polynomial degree k
    double final_time = 1.0;    // T
};

/// V_l = v0 / 2^(beta l)
struct VarianceModel {
    double v0 = 1.0;
    double beta = 1.0;
    std::vector<double> levels(int count) const;
};

/// Cost of one wave solve on level l (time-steps times matrix-vector work).
double single_wave_cost_lf(const RefinementParams& params, int level);
double single_wave_cost_lts(const RefinementParams& params, int level);

/// Cost of one coupled sample on level l: the single-solve cost at l = 0, the
/// sum of the solves on levels l and l-1 otherwise.
double cost_lf_level(const RefinementParams& params, int level);
double cost_lts_level(const RefinementParams& params, int level);

/// Total sampling cost (2/eps^2) (sum_l sqrt(V_l C_l))^2.
double total_cost(const std::vector<double>& variances, const std::vector<double>& costs,
                  double eps);

/// Ratio of the total cost with standard stepping over the total cost with
/// local stepping, for the same per-level variances.
double speedup(int dim, double fine_fraction, double p0, int levels,
               const std::vector<double>& variances);

/// Deterministic single-solve ratio p((1-r) + r p^d) / ((1-r) + r p^{d+1}).
double single_solve_speedup(int dim, double fine_fraction, double p);

enum class SweepAxis { FineFraction, RefinementRatio, VarianceDecay };

struct SweepRow {
    double axis_value = 0.0;
    double speedup = 0.0;
};

struct SweepSpec {
    SweepAxis axis = SweepAxis::FineFraction;
    double lo = 0.0;
    double hi = 1.0;
    int count = 50;
    bool log_axis = true;
    // fixed parameters: levels = ceil(log2 p0) per the uniform-finest
    // convention
    int dim = 1;
    double fine_fraction = 1e-2;
    double p0 = 13;
    double beta = 4;
};

std::vector<SweepRow> sweep_speedup(const SweepSpec& spec);

/// Graded-mesh single-solve costs: m^(s+d) for standard stepping and
/// (m^(s+d) + m^s q^d ((q+1)^s - q^s - 1)) / ((q+1)^s - q^s) with substeps on
/// the innermost q layers.
double graded_cost_lf(double m, double s, int dim);
double graded_cost_lts(double m, double s, int dim, double q);

/// Exact discrete minimizer of graded_cost_lts over q in [1, m].
long optimal_q(long m, double s, int dim);

enum class CostRegime { CoarseDominated, Critical, FineDominated };

struct CostExponent {
    CostRegime regime = CostRegime::CoarseDominated;
    double exponent = -2.0;   // power of eps in the total cost
    bool log_squared = false; // extra (log eps)^2 factor in the critical case
};

/// Three-regime total-cost exponent from the decay rates: bias ~ h^alpha,
/// variance ~ h^beta, per-sample cost ~ h^-gamma.
CostExponent mlmc_cost_exponent(double alpha, double beta, double gamma);

/// Cost growth exponents gamma on s-graded meshes.
double graded_gamma_lf(double s, int dim);                  // s + d
double graded_gamma_lts(double s, int dim);                 // s + d^2/(d+s-1)

/// Exponent e >= 0 such that the speed-up grows like eps^-e on graded meshes
/// (zero when the coarse levels dominate both methods).
double graded_speedup_exponent(double beta, double s, int dim, int degree);

/// Least-squares slope of log(y) against log(x).
double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace wavemc
