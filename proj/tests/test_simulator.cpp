#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "mfgbroker/simulator.hpp"

using namespace mfgb;

TEST_CASE("measure names round-trip") {
    for (Measure m : {Measure::Broker, Measure::Trader, Measure::Reference})
        CHECK(measure_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(measure_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("ou_step uses the exact transition") {
    // zero volatility: pure decay
    CHECK(ou_step(1.0, 2.0, 0.0, 0.3, 123.0) ==
          doctest::Approx(std::exp(-0.6)).epsilon(1e-15));
    // transition noise variance sigma^2 (1 - e^{-2kh}) / (2k)
    const double k = 2.0, sigma = 0.7, h = 0.25;
    const std::size_t n = 200000;
    const NormalStream s(5, kStreamControl, 9);
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = ou_step(0.0, k, sigma, h, s.normal(i));
        m1 += x;
        m2 += x * x;
    }
    const double var_th =
        sigma * sigma * (1.0 - std::exp(-2.0 * k * h)) / (2.0 * k);
    CHECK(std::abs(m1 / double(n)) < 5.0 * std::sqrt(var_th / double(n)));
    CHECK(m2 / double(n) ==
          doctest::Approx(var_th).epsilon(5.0 * std::sqrt(2.0 / double(n))));
}

TEST_CASE("signal draws are deterministic and start at alpha0") {
    ModelParams p;
    p.alpha0 = 1.5;
    const TimeGrid grid(1.0, 50);
    const SimPath a = draw_signals(p, TraderType{}, grid, 3, 17);
    const SimPath b = draw_signals(p, TraderType{}, grid, 3, 17);
    const SimPath c = draw_signals(p, TraderType{}, grid, 3, 18);
    CHECK(a.alpha == b.alpha);
    CHECK(a.alpha_I == b.alpha_I);
    CHECK(a.alpha != c.alpha);
    CHECK(a.alpha[0] == 1.5);
    CHECK(a.alpha_I[0] == 0.0);
    CHECK(a.dW_alpha.empty());
    const SimPath d = draw_signals(p, TraderType{}, grid, 3, 17, true);
    CHECK(d.dW_alpha.size() == 50);
    CHECK(d.dW_I.size() == 50);
    CHECK(d.dW_S.size() == 50);
}

TEST_CASE("stored increments are consistent with the signal transition") {
    // Cov(alpha_{k+1} - decay alpha_k, dW_k) = sigma (1 - decay) / k_alpha.
    const ModelParams p;
    const TimeGrid grid(0.1, 4);
    const double h = grid.dt();
    const double decay = std::exp(-p.k_alpha * h);
    const double gamma1 = p.sigma_alpha * (1.0 - decay) / p.k_alpha;
    const std::size_t n = 200000;
    double dot = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const SimPath s = draw_signals(p, TraderType{}, grid, 11, i, true);
        const double innov = s.alpha[1] - decay * s.alpha[0];
        const double x = innov * s.dW_alpha[0];
        dot += x;
        sq += x * x;
    }
    const double mean = dot / double(n);
    const double se = std::sqrt(
        std::max(sq / double(n) - mean * mean, 0.0) / double(n));
    CHECK(std::abs(mean - gamma1) < 5.0 * se);
}

TEST_CASE("equilibrium evolution matches the speed evaluators node by node") {
    const ModelParams p;
    const TimeGrid grid(p.T, 200);
    const MeanFieldCoefficients mf = solve_mean_field(p, grid);
    const TraderCoefficients tc = solve_trader(p, TraderType{}, mf);
    const SimPath sig = draw_signals(p, TraderType{}, grid, 1, 0);
    const EquilibriumPath eq = evolve_equilibrium(mf, tc, grid, sig);
    for (std::size_t k = 0; k <= grid.steps(); k += 23) {
        MarketState s;
        s.t = grid.t(k);
        s.alpha = sig.alpha[k];
        s.alpha_I = sig.alpha_I[k];
        s.Q_bar = eq.Q_bar[k];
        s.Q_barB = eq.Q_barB[k];
        s.Q_I = eq.Q_I[k];
        CHECK(eq.nu_B[k] == doctest::Approx(broker_speed(mf, s)).epsilon(1e-10));
        CHECK(eq.nu_bar[k] ==
              doctest::Approx(mean_field_speed(mf, s)).epsilon(1e-10));
        CHECK(eq.nu_I[k] ==
              doctest::Approx(trader_speed(tc, s)).epsilon(1e-10));
    }
    CHECK(eq.Q_bar[0] == 0.0);
    CHECK(eq.Q_barB[0] == 0.0);
    CHECK(eq.Q_I[0] == 0.0);
}

TEST_CASE("zero-volatility run is exactly zero everywhere") {
    ModelParams p;
    p.sigma_alpha = 0.0;
    p.sigma_S = 0.0;
    p.alpha0 = 0.0;
    TraderType tt;
    tt.sigma_I = 0.0;
    const TimeGrid grid(p.T, 200);
    const MeanFieldCoefficients mf = solve_mean_field(p, grid);
    const TraderCoefficients tc = solve_trader(p, tt, mf);
    SimConfig cfg(grid);
    cfg.n_paths = 8;
    cfg.record_every = 20;
    const auto [ensemble, stats] = simulate_equilibrium(p, mf, tc, cfg);
    for (const char* col : {"nu_bar", "nu_B", "nu_I", "Q_bar", "Q_barB",
                            "Q_I", "alpha", "alpha_I", "X_I", "X_barB"})
        for (double v : stats.columns.at(col).mean) CHECK(v == 0.0);
    for (double v : stats.columns.at("S").mean)
        CHECK(v == doctest::Approx(p.S0).epsilon(1e-15));
    const Objectives obj = estimate_objectives(stats, p, grid);
    CHECK(obj.H_I.value == 0.0);
    CHECK(obj.H_B.value == 0.0);
}

TEST_CASE("record_every must divide the step count") {
    const ModelParams p;
    const TimeGrid grid(p.T, 100);
    const MeanFieldCoefficients mf = solve_mean_field(p, grid);
    const TraderCoefficients tc = solve_trader(p, TraderType{}, mf);
    SimConfig cfg(grid);
    cfg.n_paths = 2;
    cfg.record_every = 3;
    CHECK_THROWS_AS(simulate_equilibrium(p, mf, tc, cfg),
                    std::invalid_argument);
    cfg.record_every = 0;
    CHECK_THROWS_AS(simulate_equilibrium(p, mf, tc, cfg),
                    std::invalid_argument);
}

TEST_CASE("common-signal stationary moments match the OU law") {
    const ModelParams p;
    const TimeGrid grid(p.T, 100);
    const MeanFieldCoefficients mf = solve_mean_field(p, grid);
    const TraderCoefficients tc = solve_trader(p, TraderType{}, mf);
    SimConfig cfg(grid);
    cfg.n_paths = 4000;
    cfg.record_every = 25;
    const auto [ensemble, stats] = simulate_equilibrium(p, mf, tc, cfg);
    const auto& col = stats.columns.at("alpha");
    for (std::size_t r : {1ul, 2ul, 4ul}) {
        const double t = stats.t[r];
        const double sd_th = p.sigma_alpha *
                             std::sqrt((1.0 - std::exp(-2.0 * p.k_alpha * t)) /
                                       (2.0 * p.k_alpha));
        CHECK(std::abs(col.mean[r]) < 5.0 * col.se[r]);
        CHECK(col.sd[r] ==
              doctest::Approx(sd_th).epsilon(
                  5.0 / std::sqrt(2.0 * double(cfg.n_paths))));
    }
}

TEST_CASE("recorded cash follows the stated accounting") {
    const ModelParams p;
    const TimeGrid grid(p.T, 150);
    const MeanFieldCoefficients mf = solve_mean_field(p, grid);
    const TraderCoefficients tc = solve_trader(p, TraderType{}, mf);
    SimConfig cfg(grid);
    cfg.n_paths = 2;
    cfg.n_full_paths = 2;
    cfg.record_every = 150;
    const auto [ensemble, stats] = simulate_equilibrium(p, mf, tc, cfg);
    REQUIRE(ensemble.sample_paths.size() == 2);
    const PathRecord& rec = ensemble.sample_paths[1];
    CHECK(rec.path_id == 1);
    const double h = grid.dt();
    for (std::size_t k = 0; k < grid.steps(); k += 31) {
        const double dXI = -rec.states.nu_I[k] *
                           (rec.S[k] + p.eta_I * rec.states.nu_I[k]) * h;
        CHECK(rec.X_I[k + 1] - rec.X_I[k] ==
              doctest::Approx(dXI).epsilon(1e-12));
        const double dXB =
            (rec.states.nu_bar[k] *
                 (rec.S[k] + p.eta_I * rec.states.nu_bar[k]) -
             rec.states.nu_B[k] * (rec.S[k] + p.eta_B * rec.states.nu_B[k])) *
            h;
        CHECK(rec.X_barB[k + 1] - rec.X_barB[k] ==
              doctest::Approx(dXB).epsilon(1e-12));
    }
}

TEST_CASE("terminal penalty pulls the trader inventory toward zero") {
    const ModelParams p;
    const TimeGrid grid(p.T, 1000);
    const MeanFieldCoefficients mf = solve_mean_field(p, grid);
    const TraderCoefficients tc = solve_trader(p, TraderType{}, mf);
    double sum_T = 0.0, sum_max = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        const SimPath sig = draw_signals(p, TraderType{}, grid, 2, i);
        const EquilibriumPath eq = evolve_equilibrium(mf, tc, grid, sig);
        double mx = 0.0;
        for (double q : eq.Q_I) mx = std::max(mx, std::abs(q));
        sum_T += std::abs(eq.Q_I.back());
        sum_max += mx;
    }
    CHECK(sum_T < 0.5 * sum_max);
}

TEST_CASE("results are byte-identical regardless of MFG_THREADS") {
    const ModelParams p;
    const TimeGrid grid(p.T, 200);
    const MeanFieldCoefficients mf = solve_mean_field(p, grid);
    const TraderCoefficients tc = solve_trader(p, TraderType{}, mf);
    SimConfig cfg(grid);
    cfg.n_paths = 300;  // several blocks
    cfg.record_every = 50;

    setenv("MFG_THREADS", "1", 1);
    const auto [e1, s1] = simulate_equilibrium(p, mf, tc, cfg);
    setenv("MFG_THREADS", "4", 1);
    const auto [e2, s2] = simulate_equilibrium(p, mf, tc, cfg);
    unsetenv("MFG_THREADS");

    CHECK(s1.HI_path == s2.HI_path);
    CHECK(s1.HB_path == s2.HB_path);
    CHECK(s1.nuI_sq_mean == s2.nuI_sq_mean);
    for (const auto& [name, col] : s1.columns) {
        CHECK(col.mean == s2.columns.at(name).mean);
        CHECK(col.sd == s2.columns.at(name).sd);
    }
    REQUIRE(e1.sample_paths.size() == e2.sample_paths.size());
    for (std::size_t i = 0; i < e1.sample_paths.size(); ++i)
        CHECK(e1.sample_paths[i].S == e2.sample_paths[i].S);
}

TEST_CASE("objective estimates carry finite standard errors") {
    const ModelParams p;
    const TimeGrid grid(p.T, 200);
    const MeanFieldCoefficients mf = solve_mean_field(p, grid);
    const TraderCoefficients tc = solve_trader(p, TraderType{}, mf);
    SimConfig cfg(grid);
    cfg.n_paths = 200;
    cfg.record_every = 50;
    const auto [ensemble, stats] = simulate_equilibrium(p, mf, tc, cfg);
    const Objectives obj = estimate_objectives(stats, p, grid);
    CHECK(std::isfinite(obj.H_I.value));
    CHECK(std::isfinite(obj.H_B.value));
    CHECK(obj.H_I.se > 0.0);
    CHECK(obj.H_B.se > 0.0);

    EnsembleStats empty;
    CHECK_THROWS_AS(estimate_objectives(empty, p, grid),
                    std::invalid_argument);
}

TEST_CASE("finite-N game: determinism and chaos-gap scaling") {
    const ModelParams p;
    const TimeGrid grid(p.T, 500);
    const MeanFieldCoefficients mf = solve_mean_field(p, grid);
    TraderCoefficientCache cache(p, mf);

    SimConfig cfg(grid);
    cfg.N = 0;
    CHECK_THROWS_AS(simulate_finite_N(p, mf, cache, cfg),
                    std::invalid_argument);

    cfg.N = 25;
    const ChaosReport small = simulate_finite_N(p, mf, cache, cfg);
    const ChaosReport again = simulate_finite_N(p, mf, cache, cfg);
    CHECK(small.rms_gap == again.rms_gap);
    CHECK(small.sup_gap >= small.rms_gap);
    CHECK(small.rms_gap > 0.0);

    cfg.N = 2500;
    const ChaosReport big = simulate_finite_N(p, mf, cache, cfg);
    const double ratio = small.rms_gap / big.rms_gap;  // sqrt(100) = 10
    CHECK(ratio > 3.0);
    CHECK(ratio < 30.0);

    cfg.N = 100;
    cfg.empirical_feedback = true;
    const ChaosReport emp = simulate_finite_N(p, mf, cache, cfg);
    CHECK(std::isfinite(emp.rms_gap));
    CHECK(emp.rms_gap > 0.0);
}

TEST_CASE("lognormal population uses per-type coefficient solves") {
    const ModelParams p;
    const TimeGrid grid(p.T, 300);
    const MeanFieldCoefficients mf = solve_mean_field(p, grid);
    TraderCoefficientCache cache(p, mf);
    SimConfig cfg(grid);
    cfg.N = 50;
    cfg.type_dist =
        TypeDistribution(TypeDistribution::Kind::Lognormal, TraderType{}, 0.2);
    const ChaosReport rep = simulate_finite_N(p, mf, cache, cfg);
    CHECK(std::isfinite(rep.rms_gap));
    CHECK(rep.N == 50);
}
