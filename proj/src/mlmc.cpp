#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wavemc/errors.hpp"
#include "wavemc/mlmc.hpp"

namespace wavemc {

CostRecord& CostRecord::operator+=(const CostRecord& other) {
    matvec_full += other.matvec_full;
    matvec_fine += other.matvec_fine;
    matvec_coarse += other.matvec_coarse;
    weighted_work += other.weighted_work;
    return *this;
}

SampleResult sample_delta_q(const MlmcProblem& problem, int level, RngStream stream) {
    const FieldSample field = problem.draw(stream);
    SampleResult result;
    try {
        result.q_fine = problem.solve(field, level, result.cost);
        if (level == 0) {
            result.delta_q = result.q_fine;
        } else {
            result.delta_q = result.q_fine - problem.solve(field, level - 1, result.cost);
        }
    } catch (const NumericalError& err) {
        std::ostringstream msg;
        msg << "level " << level << ", sample " << stream.id().sample_index << ": " << err.what();
        throw NumericalError(msg.str());
    }
    return result;
}

LevelAccumulator::LevelAccumulator(int lvl, const OutputGrid& grid) : level(lvl) {
    sum_dq = QoIVector{grid, std::vector<double>(grid.n, 0.0)};
    sum_q = QoIVector{grid, std::vector<double>(grid.n, 0.0)};
}

void LevelAccumulator::add(const SampleResult& sample) {
    ++n_done;
    const double dq_norm = sample.delta_q.norm();
    const double q_norm = sample.q_fine.norm();
    sum_norm2_dq += dq_norm * dq_norm;
    sum_norm2_q += q_norm * q_norm;
    sum_dq += sample.delta_q;
    sum_q += sample.q_fine;
    cost += sample.cost;
}

QoIVector LevelAccumulator::mean_dq() const {
    QoIVector mean = sum_dq;
    mean *= n_done > 0 ? 1.0 / static_cast<double>(n_done) : 0.0;
    return mean;
}

double estimate_variance(const LevelAccumulator& acc) {
    if (acc.n_done < 2) throw NumericalError("estimate_variance: need at least two samples");
    const double n = static_cast<double>(acc.n_done);
    const double sum_norm = acc.sum_dq.norm();
    return std::max(0.0, (acc.sum_norm2_dq - sum_norm * sum_norm / n) / (n - 1.0));
}

double estimate_mc_variance(const LevelAccumulator& acc) {
    if (acc.n_done < 2) throw NumericalError("estimate_mc_variance: need at least two samples");
    const double n = static_cast<double>(acc.n_done);
    const double sum_norm = acc.sum_q.norm();
    return std::max(0.0, (acc.sum_norm2_q - sum_norm * sum_norm / n) / n);
}

std::vector<long> optimal_samples(const std::vector<double>& variances,
                                  const std::vector<double>& costs, double eps,
                                  long min_samples) {
    if (variances.size() != costs.size())
        throw std::invalid_argument("optimal_samples: length mismatch");
    double total = 0.0;
    for (std::size_t l = 0; l < costs.size(); ++l) {
        if (costs[l] <= 0.0) throw std::invalid_argument("optimal_samples: costs must be positive");
        if (variances[l] < 0.0) throw std::invalid_argument("optimal_samples: negative variance");
        total += std::sqrt(variances[l] * costs[l]);
    }
    std::vector<long> counts(costs.size());
    for (std::size_t l = 0; l < costs.size(); ++l) {
        const double n = 2.0 / (eps * eps) * std::sqrt(variances[l] / costs[l]) * total;
        counts[l] = std::max(min_samples, static_cast<long>(std::ceil(n - 1e-9)));
    }
    return counts;
}

double bias_proxy_sq(const QoIVector& mean_dq_last, double alpha) {
    const double denom = std::pow(2.0, alpha) - 1.0;
    const double norm = mean_dq_last.norm() / denom;
    return norm * norm;
}

namespace {

struct Job {
    int level;
    long index;
};

void run_jobs(const MlmcProblem& problem, const MlmcConfig& config, const std::vector<Job>& jobs,
              std::vector<LevelAccumulator>& accumulators) {
    constexpr std::size_t kWave = 4096;
    for (std::size_t start = 0; start < jobs.size(); start += kWave) {
        const std::size_t count = std::min(kWave, jobs.size() - start);
        std::vector<SampleResult> results(count);
        std::atomic<std::size_t> cursor{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;

        auto worker = [&]() {
            while (true) {
                const std::size_t i = cursor.fetch_add(1);
                if (i >= count) break;
                const Job job = jobs[start + i];
                try {
                    results[i] = sample_delta_q(
                        problem, job.level,
                        derive_stream(config.master_seed, static_cast<std::uint32_t>(job.level),
                                      static_cast<std::uint64_t>(job.index)));
                } catch (...) {
                    std::scoped_lock lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    cursor.store(count);
                    break;
                }
            }
        };

        if (config.workers <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(config.workers);
            for (int w = 0; w < config.workers; ++w) pool.emplace_back(worker);
        }
        if (failure) std::rethrow_exception(failure);

        // fold in (level, index) order: jobs are already sorted by construction
        for (std::size_t i = 0; i < count; ++i)
            accumulators[jobs[start + i].level].add(results[i]);
    }
}

double bias_over_window(const std::vector<LevelAccumulator>& acc, const MlmcConfig& config) {
    const int top = static_cast<int>(acc.size()) - 1;
    double worst = 0.0;
    for (int j = 0; j < config.bias_window && top - j >= 1; ++j) {
        const int level = top - j;
        const double proxy = bias_proxy_sq(acc[level].mean_dq(), config.alpha) *
                             std::pow(2.0, -2.0 * config.alpha * (top - level));
        worst = std::max(worst, proxy);
    }
    return worst;
}

}  // namespace

MlmcResult run_mlmc(const MlmcProblem& problem, const MlmcConfig& config) {
    if (config.eps <= 0.0) throw std::invalid_argument("run_mlmc: eps must be positive");
    if (config.alpha < 1.0) throw std::invalid_argument("run_mlmc: alpha >= 1 required");

    const int level_cap = std::min(config.max_level, problem.max_levels_available);
    int top = std::min(config.initial_levels, level_cap);

    std::vector<LevelAccumulator> acc;
    std::vector<long> targets;
    for (int l = 0; l <= top; ++l) {
        acc.emplace_back(l, problem.grid);
        targets.push_back(config.initial_samples);
    }

    bool converged = false;
    while (true) {
        std::vector<Job> jobs;
        for (int l = 0; l <= top; ++l)
            for (long i = acc[l].n_done; i < targets[l]; ++i) jobs.push_back({l, i});
        run_jobs(problem, config, jobs, acc);

        std::vector<double> variances(top + 1), costs(top + 1);
        for (int l = 0; l <= top; ++l) {
            variances[l] = estimate_variance(acc[l]);
            costs[l] = problem.model_cost(l);
        }
        const auto wanted = optimal_samples(variances, costs, config.eps);
        bool increased = false;
        for (int l = 0; l <= top; ++l)
            if (wanted[l] > targets[l]) {
                targets[l] = wanted[l];
                increased = true;
            }
        if (increased) continue;

        if (top >= 1 && bias_over_window(acc, config) < 0.5 * config.eps * config.eps) {
            converged = true;
            break;
        }
        if (top >= level_cap) break;  // best effort
        ++top;
        acc.emplace_back(top, problem.grid);
        targets.push_back(config.initial_samples);
    }

    MlmcResult result;
    result.eps = config.eps;
    result.converged = converged;
    result.estimate = QoIVector{problem.grid, std::vector<double>(problem.grid.n, 0.0)};
    for (int l = 0; l <= top; ++l) {
        result.estimate += acc[l].mean_dq();
        LevelStats stats;
        stats.level = l;
        stats.n_samples = acc[l].n_done;
        stats.variance = estimate_variance(acc[l]);
        stats.mc_variance = estimate_mc_variance(acc[l]);
        stats.mean_dq_norm = acc[l].mean_dq().norm();
        stats.bias_proxy = l >= 1 ? bias_proxy_sq(acc[l].mean_dq(), config.alpha) : 0.0;
        stats.model_cost = problem.model_cost(l);
        stats.measured = acc[l].cost;
        result.levels.push_back(stats);

        result.total_variance += stats.variance / static_cast<double>(stats.n_samples);
        result.total_model_cost += stats.model_cost * static_cast<double>(stats.n_samples);
        result.measured_work += stats.measured.weighted_work;
    }
    result.bias = bias_over_window(acc, config);
    return result;
}

}  // namespace wavemc
