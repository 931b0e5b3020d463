#include <cmath>
#include <numeric>
#include <stdexcept>

#include "wavemc/errors.hpp"
#include "wavemc/integrators.hpp"

namespace wavemc {

namespace {

constexpr double kBlowupThreshold = 1e100;

void check_finite(const std::vector<double>& z, long step) {
    for (double v : z)
        if (!std::isfinite(v) || std::abs(v) > kBlowupThreshold)
            throw InstabilityError("time integration unstable", step);
}

void apply_fine(const DiscreteOperator& op, const std::vector<double>& x, std::vector<double>& y,
                StepCounters& counters) {
    op.a_fine.multiply(x, y);
    ++counters.fine;
}

void apply_coarse(const DiscreteOperator& op, const std::vector<double>& x, std::vector<double>& y,
                  StepCounters& counters) {
    op.a_coarse.multiply(x, y);
    ++counters.coarse;
}

}  // namespace

ChebyshevConstants chebyshev_constants_with_delta(int p, double delta) {
    if (p < 1) throw std::invalid_argument("chebyshev_constants: p >= 1 required");
    ChebyshevConstants c;
    c.p = p;
    c.delta = delta;
    // T_k(delta) for k = 0..p and U_{p-1}(delta); T_p' = p U_{p-1}
    std::vector<double> t(p + 1);
    t[0] = 1.0;
    if (p >= 1) t[1] = delta;
    for (int k = 2; k <= p; ++k) t[k] = 2.0 * delta * t[k - 1] - t[k - 2];
    double u_prev = 1.0, u = 2.0 * delta;  // U_0, U_1
    for (int k = 2; k <= p - 1; ++k) {
        const double next = 2.0 * delta * u - u_prev;
        u_prev = u;
        u = next;
    }
    const double u_pm1 = (p == 1) ? 1.0 : u;
    c.omega = 2.0 * p * u_pm1 / t[p];
    c.beta_int.resize(p - 1);
    c.beta_half.resize(p - 1);
    for (int k = 1; k <= p - 1; ++k) {
        c.beta_int[k - 1] = t[k - 1] / t[k + 1];
        c.beta_half[k - 1] = t[k] / t[k + 1];
    }
    return c;
}

ChebyshevConstants chebyshev_constants(int p, double nu) {
    if (nu < 0.0 || nu > 1.0) throw std::invalid_argument("chebyshev_constants: nu in [0,1]");
    ChebyshevConstants c = chebyshev_constants_with_delta(p, 1.0 + nu / (double(p) * p));
    c.nu = nu;
    return c;
}

WaveState leapfrog_init(const DiscreteOperator& op, const InitialData& data, double dt,
                        const ForcingFn* forcing, StepCounters& counters, StepWorkspace& ws) {
    const std::size_t n = data.z0.size();
    WaveState state;
    state.dt = dt;
    state.z_prev = data.z0;
    state.z_curr.resize(n);
    ws.aq.resize(n);
    op.normalized.multiply(data.z0, ws.aq);
    ++counters.full;
    ws.forcing.assign(n, 0.0);
    if (forcing) (*forcing)(0.0, ws.forcing);
    for (std::size_t i = 0; i < n; ++i)
        state.z_curr[i] = data.z0[i] + dt * data.mhalf_v0[i] +
                          0.5 * dt * dt * (ws.forcing[i] - ws.aq[i]);
    state.t = dt;
    state.step = 1;
    check_finite(state.z_curr, state.step);
    return state;
}

void leapfrog_step(const DiscreteOperator& op, WaveState& state, const ForcingFn* forcing,
                   StepCounters& counters, StepWorkspace& ws) {
    const std::size_t n = state.z_curr.size();
    ws.aq.resize(n);
    op.normalized.multiply(state.z_curr, ws.aq);
    ++counters.full;
    const double dt2 = state.dt * state.dt;
    if (forcing) {
        ws.forcing.assign(n, 0.0);
        (*forcing)(state.t, ws.forcing);
        for (std::size_t i = 0; i < n; ++i) {
            const double next = 2.0 * state.z_curr[i] - state.z_prev[i] +
                                dt2 * (ws.forcing[i] - ws.aq[i]);
            state.z_prev[i] = state.z_curr[i];
            state.z_curr[i] = next;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double next = 2.0 * state.z_curr[i] - state.z_prev[i] - dt2 * ws.aq[i];
            state.z_prev[i] = state.z_curr[i];
            state.z_curr[i] = next;
        }
    }
    state.t += state.dt;
    ++state.step;
    check_finite(state.z_curr, state.step);
}

void lts_step(const DiscreteOperator& op, WaveState& state, const ChebyshevConstants& consts,
              StepCounters& counters, StepWorkspace& ws) {
    const std::size_t n = state.z_curr.size();
    const int p = consts.p;
    const double tau2 = (state.dt / p) * (state.dt / p);

    // the substep states are carried as deviations d_m = q_m - z_n, so the
    // reduction to plain leapfrog away from the selected block is exact up to
    // roundoff of the deviation itself
    ws.w.resize(n);
    ws.aq.resize(n);
    ws.az_fine.resize(n);
    ws.q_prev.assign(n, 0.0);  // d_0
    ws.q_curr.resize(n);

    apply_coarse(op, state.z_curr, ws.w, counters);    // A (I-P) z_n
    apply_fine(op, state.z_curr, ws.az_fine, counters);  // A P q_0
    const double c0 = 0.5 * tau2 * 2.0 * p * p / (consts.omega * consts.delta);
    for (std::size_t i = 0; i < n; ++i) ws.q_curr[i] = -c0 * (ws.w[i] + ws.az_fine[i]);

    for (int m = 1; m <= p - 1; ++m) {
        apply_fine(op, ws.q_curr, ws.aq, counters);  // A P d_m
        const double beta = consts.beta_int[m - 1];
        const double cm = tau2 * 2.0 * p * p / consts.omega * consts.beta_half[m - 1];
        for (std::size_t i = 0; i < n; ++i) {
            const double next = (1.0 + beta) * ws.q_curr[i] - beta * ws.q_prev[i] -
                                cm * (ws.w[i] + ws.az_fine[i] + ws.aq[i]);
            ws.q_prev[i] = ws.q_curr[i];
            ws.q_curr[i] = next;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double next = 2.0 * state.z_curr[i] - state.z_prev[i] + 2.0 * ws.q_curr[i];
        state.z_prev[i] = state.z_curr[i];
        state.z_curr[i] = next;
    }
    state.t += state.dt;
    ++state.step;
    check_finite(state.z_curr, state.step);
}

double discrete_energy(const CsrMatrix& a, std::span<const double> z_prev,
                       std::span<const double> z_curr, double dt) {
    double kinetic = 0.0;
    for (std::size_t i = 0; i < z_curr.size(); ++i) {
        const double v = (z_curr[i] - z_prev[i]) / dt;
        kinetic += v * v;
    }
    std::vector<double> az(z_curr.size());
    a.multiply(z_curr, az);
    const double cross = std::inner_product(az.begin(), az.end(), z_prev.begin(), 0.0);
    return 0.5 * kinetic + 0.5 * cross;
}

double discrete_energy(const DiscreteOperator& op, const WaveState& state) {
    return discrete_energy(op.normalized, state.z_prev, state.z_curr, state.dt);
}

RunResult run_wave(const DiscreteOperator& op, const InitialData& data, const RunOptions& options) {
    if (options.final_time < 0.0) throw std::invalid_argument("run_wave: negative final time");

    RunResult result;
    if (options.final_time == 0.0) {
        result.state.z_prev = data.z0;
        result.state.z_curr = data.z0;
        result.state.dt = options.dt;
        return result;
    }
    if (options.dt <= 0.0) throw std::invalid_argument("run_wave: dt must be positive");

    const long n_steps = static_cast<long>(std::ceil(options.final_time / options.dt - 1e-12));
    const double dt = options.final_time / static_cast<double>(n_steps);
    result.n_steps = n_steps;
    result.dt = dt;

    ChebyshevConstants consts;
    if (options.kind == Integrator::LocalTimeStepping)
        consts = chebyshev_constants(options.substeps, options.nu);

    StepWorkspace ws;
    result.state = leapfrog_init(op, data, dt, options.forcing, result.counters, ws);
    if (options.snapshot && options.snapshot_every > 0) options.snapshot(result.state);
    for (long s = 1; s < n_steps; ++s) {
        if (options.kind == Integrator::Leapfrog)
            leapfrog_step(op, result.state, options.forcing, result.counters, ws);
        else
            lts_step(op, result.state, consts, result.counters, ws);
        if (options.snapshot && options.snapshot_every > 0 &&
            (result.state.step % options.snapshot_every == 0 || s + 1 == n_steps))
            options.snapshot(result.state);
    }
    return result;
}

}  // namespace wavemc
