#include <cmath>
#include <limits>
#include <stdexcept>

#include "wavemc/cost_model.hpp"

namespace wavemc {

namespace {

double prefactor(const RefinementParams& p) {
    return p.final_time * std::pow(static_cast<double>(p.degree), 2 * (p.dim + 1)) /
           std::pow(p.h0, p.dim + 1);
}

}  // namespace

std::vector<double> VarianceModel::levels(int count) const {
    std::vector<double> v(count);
    for (int l = 0; l < count; ++l) v[l] = v0 / std::pow(2.0, beta * l);
    return v;
}

double single_wave_cost_lf(const RefinementParams& params, int level) {
    const double r = params.fine_fraction;
    const double pl = params.p0 / std::pow(2.0, level);
    const double hl = params.h0 / std::pow(2.0, level);
    return params.final_time * std::pow(static_cast<double>(params.degree), 2 * (params.dim + 1)) *
           pl / std::pow(hl, params.dim + 1) * ((1.0 - r) + r * std::pow(pl, params.dim));
}

double single_wave_cost_lts(const RefinementParams& params, int level) {
    const double r = params.fine_fraction;
    const double pl = params.p0 / std::pow(2.0, level);
    const double hl = params.h0 / std::pow(2.0, level);
    return params.final_time * std::pow(static_cast<double>(params.degree), 2 * (params.dim + 1)) /
           std::pow(hl, params.dim + 1) * ((1.0 - r) + r * std::pow(pl, params.dim + 1));
}

double cost_lf_level(const RefinementParams& params, int level) {
    const double r = params.fine_fraction;
    const int d = params.dim;
    if (level == 0)
        return prefactor(params) * ((1.0 - r) * params.p0 + r * std::pow(params.p0, d + 1));
    const double coarse = (1.0 - r) * (std::pow(2.0, d) + 1.0) / std::pow(2.0, d) *
                          std::pow(2.0, d * level) * params.p0;
    return prefactor(params) * (coarse + 2.0 * r * std::pow(params.p0, d + 1));
}

double cost_lts_level(const RefinementParams& params, int level) {
    const double r = params.fine_fraction;
    const int d = params.dim;
    if (level == 0)
        return prefactor(params) * ((1.0 - r) + r * std::pow(params.p0, d + 1));
    const double coarse = (1.0 - r) * (std::pow(2.0, d + 1) + 1.0) / std::pow(2.0, d + 1) *
                          std::pow(2.0, (d + 1) * level);
    return prefactor(params) * (coarse + 2.0 * r * std::pow(params.p0, d + 1));
}

double total_cost(const std::vector<double>& variances, const std::vector<double>& costs,
                  double eps) {
    if (variances.size() != costs.size())
        throw std::invalid_argument("total_cost: length mismatch");
    double sum = 0.0;
    for (std::size_t l = 0; l < costs.size(); ++l) sum += std::sqrt(variances[l] * costs[l]);
    return 2.0 / (eps * eps) * sum * sum;
}

double speedup(int dim, double fine_fraction, double p0, int levels,
               const std::vector<double>& variances) {
    RefinementParams params;
    params.dim = dim;
    params.fine_fraction = fine_fraction;
    params.p0 = p0;
    std::vector<double> lf(levels + 1), lts(levels + 1);
    for (int l = 0; l <= levels; ++l) {
        lf[l] = cost_lf_level(params, l);
        lts[l] = cost_lts_level(params, l);
    }
    std::vector<double> v(variances.begin(), variances.begin() + levels + 1);
    return total_cost(v, lf, 1.0) / total_cost(v, lts, 1.0);
}

double single_solve_speedup(int dim, double fine_fraction, double p) {
    const double r = fine_fraction;
    return p * ((1.0 - r) + r * std::pow(p, dim)) / ((1.0 - r) + r * std::pow(p, dim + 1));
}

std::vector<SweepRow> sweep_speedup(const SweepSpec& spec) {
    std::vector<SweepRow> rows(spec.count);
    for (int i = 0; i < spec.count; ++i) {
        const double t = spec.count == 1 ? 0.0 : static_cast<double>(i) / (spec.count - 1);
        const double x = spec.log_axis ? spec.lo * std::pow(spec.hi / spec.lo, t)
                                       : spec.lo + (spec.hi - spec.lo) * t;
        double r = spec.fine_fraction, p0 = spec.p0, beta = spec.beta;
        switch (spec.axis) {
            case SweepAxis::FineFraction: r = x; break;
            case SweepAxis::RefinementRatio: p0 = x; break;
            case SweepAxis::VarianceDecay: beta = x; break;
        }
        const int levels = std::max(0, static_cast<int>(std::ceil(std::log2(p0) - 1e-12)));
        const VarianceModel vm{1.0, beta};
        rows[i] = {x, speedup(spec.dim, r, p0, levels, vm.levels(levels + 1))};
    }
    return rows;
}

double graded_cost_lf(double m, double s, int dim) {
    return std::pow(m, s + dim);
}

double graded_cost_lts(double m, double s, int dim, double q) {
    if (q < 1.0 || q > m) throw std::invalid_argument("graded_cost_lts: q in [1, m]");
    const double dq = std::pow(q + 1.0, s) - std::pow(q, s);
    return (std::pow(m, s + dim) + std::pow(m, s) * std::pow(q, dim) * (dq - 1.0)) / dq;
}

long optimal_q(long m, double s, int dim) {
    if (m < 2) throw std::invalid_argument("optimal_q: m >= 2 required");
    if (s < 1.0) throw std::invalid_argument("optimal_q: s >= 1 required");
    long best_q = 1;
    double best = std::numeric_limits<double>::infinity();
    for (long q = 1; q <= m; ++q) {
        const double c = graded_cost_lts(static_cast<double>(m), s, dim, static_cast<double>(q));
        if (c < best) {
            best = c;
            best_q = q;
        }
    }
    return best_q;
}

CostExponent mlmc_cost_exponent(double alpha, double beta, double gamma) {
    if (alpha <= 0.0 || beta <= 0.0 || gamma <= 0.0)
        throw std::invalid_argument("mlmc_cost_exponent: rates must be positive");
    CostExponent e;
    if (beta > gamma) {
        e.regime = CostRegime::CoarseDominated;
        e.exponent = -2.0;
    } else if (beta == gamma) {
        e.regime = CostRegime::Critical;
        e.exponent = -2.0;
        e.log_squared = true;
    } else {
        e.regime = CostRegime::FineDominated;
        e.exponent = -2.0 - (gamma - beta) / alpha;
    }
    return e;
}

double graded_gamma_lf(double s, int dim) { return s + dim; }

double graded_gamma_lts(double s, int dim) {
    return s + static_cast<double>(dim) * dim / (dim + s - 1.0);
}

double graded_speedup_exponent(double beta, double s, int dim, int degree) {
    const double gamma_lf = graded_gamma_lf(s, dim);
    const double gamma_lts = graded_gamma_lts(s, dim);
    if (beta > gamma_lf) return 0.0;
    if (beta > gamma_lts) return (s + dim - beta) / (degree + 1.0);
    return dim * (s - 1.0) / ((degree + 1.0) * (s + dim - 1.0));
}

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_log_slope: need two matched points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace wavemc
