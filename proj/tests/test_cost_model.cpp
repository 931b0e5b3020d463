#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "wavemc/cost_model.hpp"
#include "wavemc/rng.hpp"

using namespace wavemc;

TEST_CASE("level-zero cost on a uniform mesh is the bare prefactor") {
    RefinementParams p;
    p.dim = 1;
    p.fine_fraction = 0.0;
    p.p0 = 1;
    CHECK(cost_lf_level(p, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cost_lts_level(p, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("level-zero cost with refinement matches the hand evaluation") {
    RefinementParams p;
    p.dim = 1;
    p.fine_fraction = 0.01;
    p.p0 = 16;
    // 0.99 * 16 + 0.01 * 256
    CHECK(cost_lf_level(p, 0) == doctest::Approx(18.4).epsilon(1e-14));
}

TEST_CASE("pair costs equal the sum of the two single solves") {
    RefinementParams p;
    p.dim = 2;
    p.fine_fraction = 3e-3;
    p.p0 = 24;
    p.h0 = 0.05;
    p.final_time = 2.0;
    for (int level = 1; level <= 4; ++level) {
        CHECK(cost_lf_level(p, level) ==
              doctest::Approx(single_wave_cost_lf(p, level) + single_wave_cost_lf(p, level - 1))
                  .epsilon(1e-12));
        CHECK(cost_lts_level(p, level) ==
              doctest::Approx(single_wave_cost_lts(p, level) + single_wave_cost_lts(p, level - 1))
                  .epsilon(1e-12));
    }
    CHECK(cost_lf_level(p, 0) == doctest::Approx(single_wave_cost_lf(p, 0)).epsilon(1e-12));
}

TEST_CASE("channel-regime level-zero cost ratio is about seven and a half") {
    RefinementParams p;
    p.dim = 2;
    p.fine_fraction = 2.1e-4;
    p.p0 = 22;
    const double ratio = cost_lf_level(p, 0) / cost_lts_level(p, 0);
    CHECK(ratio == doctest::Approx(7.48839).epsilon(1e-4));  // frozen regression
    CHECK(ratio > 5.0);
    CHECK(ratio < 10.0);
}

TEST_CASE("without refinement the two models differ by the pair constants only") {
    // p0 = 1 leaves only the coarse terms; on the first level the models are
    // within the (2^d+1)/2^d vs (2^(d+1)+1)/2^(d+1) pair constants
    for (int d : {1, 2, 3}) {
        RefinementParams p;
        p.dim = d;
        p.fine_fraction = 0.0;
        p.p0 = 1;
        const double ratio = cost_lf_level(p, 1) / cost_lts_level(p, 1);
        CHECK(ratio > 0.5);
        CHECK(ratio < 1.5);
    }
}

TEST_CASE("total cost collapses correctly") {
    CHECK(total_cost({2.0}, {3.0}, 1.0) == doctest::Approx(12.0).epsilon(1e-15));  // 2 V C / eps^2
    CHECK(total_cost({1.0, 0.25}, {1.0, 4.0}, 1.0) == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(total_cost({1.0, 0.25}, {1.0, 4.0}, 0.5) == doctest::Approx(32.0).epsilon(1e-15));
}

TEST_CASE("speed-up is exactly one in the degenerate cases") {
    const VarianceModel vm{1.0, 4.0};
    CHECK(speedup(1, 1.0, 8.0, 3, vm.levels(4)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(speedup(2, 1.0, 16.0, 4, vm.levels(5)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(speedup(1, 0.37, 1.0, 0, vm.levels(1)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("fixed-parameter speed-ups match frozen regression values") {
    // (d, r, p0, beta) rows with L = ceil(log2 p0)
    CHECK(speedup(1, 1e-2, 13, 4, VarianceModel{1.0, 4.0}.levels(5)) ==
          doctest::Approx(4.75619850383301).epsilon(1e-12));
    CHECK(speedup(2, 1e-4, 19, 5, VarianceModel{1.0, 6.0}.levels(6)) ==
          doctest::Approx(10.1581787973104).epsilon(1e-12));
    CHECK(speedup(3, 1e-6, 27, 5, VarianceModel{1.0, 8.0}.levels(6)) ==
          doctest::Approx(16.3909552106477).epsilon(1e-12));
}

TEST_CASE("local stepping never models slower than standard stepping") {
    // valid tuples keep the coarse-to-fine ratio >= 1 on every level, i.e.
    // L <= floor(log2 p0); there the per-level model costs are ordered
    RngStream rng = derive_stream(2024, 0, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 1 + static_cast<int>(rng.next_uniform(0.0, 3.0));
        const double r = std::pow(10.0, rng.next_uniform(-6.0, -0.05));
        const double p0 = rng.next_uniform(2.0, 64.0);
        const double beta = rng.next_uniform(0.5, 8.0);
        const int max_levels = static_cast<int>(std::floor(std::log2(p0)));
        const int levels = static_cast<int>(rng.next_uniform(0.0, max_levels + 1.0));
        const double s = speedup(d, r, p0, levels, VarianceModel{1.0, beta}.levels(levels + 1));
        CHECK(s >= 1.0 - 1e-12);

        RefinementParams params;
        params.dim = d;
        params.fine_fraction = r;
        params.p0 = p0;
        for (int l = 0; l <= levels; ++l)
            CHECK(cost_lf_level(params, l) >= cost_lts_level(params, l) * (1.0 - 1e-12));
    }
}

TEST_CASE("sweeps show the documented shapes") {
    SweepSpec spec;
    spec.axis = SweepAxis::FineFraction;
    spec.lo = 1e-6;
    spec.hi = 1.0;
    spec.count = 40;
    spec.dim = 2;
    spec.fine_fraction = 1e-4;
    spec.p0 = 19;
    spec.beta = 6;
    const auto r_rows = sweep_speedup(spec);
    for (std::size_t i = 1; i < r_rows.size(); ++i)
        CHECK(r_rows[i].speedup <= r_rows[i - 1].speedup * (1.0 + 1e-12));
    CHECK(r_rows.back().speedup == doctest::Approx(1.0).epsilon(1e-12));  // r = 1

    // interior maximum of the p0 sweep in [10, 30] for all three parameter rows
    struct Row { int d; double r; double beta; };
    for (const Row row : {Row{1, 1e-2, 4.0}, Row{2, 1e-4, 6.0}, Row{3, 1e-6, 8.0}}) {
        spec.axis = SweepAxis::RefinementRatio;
        spec.lo = 2.0;
        spec.hi = 256.0;
        spec.count = 120;
        spec.dim = row.d;
        spec.fine_fraction = row.r;
        spec.beta = row.beta;
        const auto rows = sweep_speedup(spec);
        double best = 0.0, best_p = 0.0;
        for (const auto& entry : rows)
            if (entry.speedup > best) { best = entry.speedup; best_p = entry.axis_value; }
        CHECK(best_p >= 10.0);
        CHECK(best_p <= 30.0);
        CHECK(best > rows.front().speedup);
        CHECK(best > rows.back().speedup);
    }

    spec.axis = SweepAxis::VarianceDecay;
    spec.lo = 0.5;
    spec.hi = 10.0;
    spec.count = 39;
    spec.log_axis = false;
    spec.dim = 2;
    spec.fine_fraction = 1e-4;
    spec.p0 = 19;
    const auto beta_rows = sweep_speedup(spec);
    for (std::size_t i = 1; i < beta_rows.size(); ++i)
        CHECK(beta_rows[i].speedup >= beta_rows[i - 1].speedup * (1.0 - 1e-12));
}

TEST_CASE("single-solve speed-up has the documented limits and an interior peak") {
    CHECK(single_solve_speedup(2, 0.3, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    // r -> 0 limit approaches p
    CHECK(single_solve_speedup(1, 1e-12, 40.0) == doctest::Approx(40.0).epsilon(1e-6));
    // r = 1/100^d has an interior maximum over p
    const double r = 1.0 / (100.0 * 100.0);
    double best = 0.0, best_p = 0.0;
    for (double p = 1.0; p <= 400.0; p += 0.5) {
        const double s = single_solve_speedup(2, r, p);
        if (s > best) { best = s; best_p = p; }
    }
    CHECK(best_p > 1.0);
    CHECK(best_p < 400.0);
    CHECK(best > single_solve_speedup(2, r, 1.0));
    CHECK(best > single_solve_speedup(2, r, 400.0));
}

TEST_CASE("graded costs reduce correctly for unit grading") {
    for (double q : {1.0, 3.0, 7.0}) {
        CHECK(graded_cost_lts(8.0, 1.0, 2, q) == doctest::Approx(std::pow(8.0, 3.0)).epsilon(1e-14));
        CHECK(graded_cost_lts(8.0, 1.0, 2, q) ==
              doctest::Approx(graded_cost_lf(8.0, 1.0, 2)).epsilon(1e-14));
    }
    CHECK(optimal_q(8, 1.0, 2) == 1);  // tie-break at the smallest q
}

TEST_CASE("graded cost matches the hand evaluation") {
    CHECK(graded_cost_lts(100.0, 2.0, 2, 1.0) == doctest::Approx(3.334e7).epsilon(1e-4));
    CHECK_THROWS_AS(graded_cost_lts(100.0, 2.0, 2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(graded_cost_lts(100.0, 2.0, 2, 101.0), std::invalid_argument);
}

TEST_CASE("optimal q is the discrete minimizer and the ratio grows with m") {
    double previous_ratio = 0.0;
    for (long m : {32L, 64L, 128L, 256L}) {
        const long q = optimal_q(m, 2.0, 2);
        const double at = graded_cost_lts(double(m), 2.0, 2, double(q));
        if (q > 1) CHECK(at <= graded_cost_lts(double(m), 2.0, 2, double(q - 1)) * (1.0 + 1e-12));
        if (q < m) CHECK(at <= graded_cost_lts(double(m), 2.0, 2, double(q + 1)) * (1.0 + 1e-12));
        const double ratio = graded_cost_lf(double(m), 2.0, 2) / at;
        CHECK(ratio > previous_ratio);
        previous_ratio = ratio;
    }
}

TEST_CASE("optimal q scales like m^(d/(d+s-1))") {
    struct Case { int d; double s; };
    for (const Case c : {Case{1, 2.0}, Case{2, 2.0}, Case{1, 3.0}}) {
        std::vector<double> ms, qs;
        for (long m = 16; m <= 4096; m *= 2) {
            ms.push_back(static_cast<double>(m));
            qs.push_back(static_cast<double>(optimal_q(m, c.s, c.d)));
        }
        const double slope = fit_log_slope(ms, qs);
        const double expected = c.d / (c.d + c.s - 1.0);
        CHECK(std::abs(slope - expected) < 0.07);
    }
}

TEST_CASE("cost exponents reproduce the three regimes") {
    // independent re-implementation of the case split as the oracle
    const auto oracle = [](double alpha, double beta, double gamma) {
        if (beta > gamma) return std::pair<double, bool>{-2.0, false};
        if (beta == gamma) return std::pair<double, bool>{-2.0, true};
        return std::pair<double, bool>{-2.0 - (gamma - beta) / alpha, false};
    };
    RngStream rng = derive_stream(77, 0, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const double alpha = rng.next_uniform(0.5, 3.0);
        const double beta = rng.next_uniform(0.25, 6.0);
        const double gamma = (trial % 5 == 0) ? beta : rng.next_uniform(0.25, 6.0);
        const auto expected = oracle(alpha, beta, gamma);
        const CostExponent got = mlmc_cost_exponent(alpha, beta, gamma);
        CHECK(got.exponent == doctest::Approx(expected.first).epsilon(1e-14));
        CHECK(got.log_squared == expected.second);
    }
    CHECK(mlmc_cost_exponent(2.0, 5.0, 3.0).regime == CostRegime::CoarseDominated);
    CHECK(mlmc_cost_exponent(2.0, 3.0, 3.0).regime == CostRegime::Critical);
    CHECK(mlmc_cost_exponent(2.0, 1.0, 3.0).regime == CostRegime::FineDominated);
}

TEST_CASE("graded exponents and the speed-up growth rate") {
    CHECK(graded_gamma_lf(2.0, 2) == doctest::Approx(4.0));
    CHECK(graded_gamma_lts(2.0, 2) == doctest::Approx(2.0 + 4.0 / 3.0));
    CHECK(graded_gamma_lts(2.0, 3) == doctest::Approx(17.0 / 4.0));  // 2 + 9/4

    // low-variance regime in d=3, s=2 with linear elements grows like eps^(-3/8)
    CHECK(graded_speedup_exponent(1.0, 2.0, 3, 1) == doctest::Approx(3.0 / 8.0).epsilon(1e-14));
    // middle regime: (s + d - beta) / (k + 1)
    CHECK(graded_speedup_exponent(4.5, 2.0, 3, 1) == doctest::Approx((2.0 + 3.0 - 4.5) / 2.0));
    // coarse-dominated regime: no growth
    CHECK(graded_speedup_exponent(6.0, 2.0, 3, 1) == 0.0);
}
