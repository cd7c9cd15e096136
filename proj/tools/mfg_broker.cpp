#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mfgbroker/equilibrium.hpp"
#include "mfgbroker/io.hpp"
#include "mfgbroker/simulator.hpp"
#include "mfgbroker/verification.hpp"

namespace fs = std::filesystem;
using namespace mfgb;

namespace {

constexpr const char* kToolVersion = "mfg_broker 1.0.0";

// Exit codes: 0 success, 2 validation failure, 3 check-suite failure, 4 I/O.
constexpr int kExitValidation = 2;
constexpr int kExitChecks = 3;
constexpr int kExitIo = 4;

struct StageClock {
    std::vector<std::pair<std::string, double>> stages;
    std::chrono::steady_clock::time_point mark =
        std::chrono::steady_clock::now();

    void lap(const std::string& name) {
        const auto now = std::chrono::steady_clock::now();
        stages.emplace_back(
            name, std::chrono::duration<double>(now - mark).count());
        mark = now;
    }
};

// Leftover tokens after the declared flags: dot-path overrides of the form
// --key value or --key=value.
void apply_extras(RunConfig& cfg, const std::vector<std::string>& extras) {
    for (std::size_t i = 0; i < extras.size(); ++i) {
        std::string key = extras[i];
        if (key.rfind("--", 0) != 0)
            throw std::invalid_argument("unexpected argument: " + key);
        key = key.substr(2);
        std::string value;
        const auto eq = key.find('=');
        if (eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (++i >= extras.size())
                throw std::invalid_argument("missing value for --" + key);
            value = extras[i];
        }
        apply_override(cfg, key, value);
    }
}

fs::path ensure_out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory: " +
                                 cfg.out_dir);
    return dir;
}

void finish_manifest(RunManifest& m, const RunConfig& cfg, StageClock& clock,
                     const std::vector<fs::path>& files,
                     const fs::path& dir) {
    m.config_json = config_to_json(cfg);
    m.seed = cfg.seed;
    m.tool_version = kToolVersion;
    m.stage_seconds = clock.stages;
    for (const fs::path& f : files)
        m.files.push_back({f.filename().string(), file_hash(f.string())});
    write_manifest(m, (dir / "manifest.json").string());
}

int cmd_solve(const RunConfig& cfg) {
    StageClock clock;
    const fs::path dir = ensure_out_dir(cfg);
    const MeanFieldCoefficients mf = solve_mean_field(cfg.model, cfg.grid());
    const TraderCoefficients tc =
        solve_trader(cfg.model, cfg.trader_type, mf);
    clock.lap("solve");

    const fs::path mf_csv = dir / "g_h_coefficients.csv";
    const fs::path tc_csv = dir / "trader_0_coefficients.csv";
    write_mean_field_csv(mf, mf_csv.string());
    write_trader_csv(tc, tc_csv.string());
    clock.lap("write");

    RunManifest m;
    finish_manifest(m, cfg, clock, {mf_csv, tc_csv}, dir);
    std::cout << "solved coefficients on M=" << cfg.grid_M
              << " grid -> " << dir.string() << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& cfg) {
    StageClock clock;
    const fs::path dir = ensure_out_dir(cfg);
    const MeanFieldCoefficients mf = solve_mean_field(cfg.model, cfg.grid());
    const TraderCoefficients tc =
        solve_trader(cfg.model, cfg.trader_type, mf);
    clock.lap("solve");

    const SimConfig sc = cfg.sim_config();
    const auto [ensemble, stats] = simulate_equilibrium(cfg.model, mf, tc, sc);
    clock.lap("simulate");

    const fs::path stats_csv = dir / "stats.csv";
    const fs::path paths_csv = dir / "paths.csv";
    write_stats_csv(stats, stats_csv.string());
    write_paths_csv(ensemble, cfg.grid(), paths_csv.string());
    std::vector<fs::path> files = {stats_csv, paths_csv};

    if (cfg.N > 0) {
        TraderCoefficientCache cache(cfg.model, mf);
        const ChaosReport chaos = simulate_finite_N(cfg.model, mf, cache, sc);
        clock.lap("finite_N");
        std::cout << "finite-N gap: N=" << chaos.N
                  << " sup=" << chaos.sup_gap << " rms=" << chaos.rms_gap
                  << "\n";
    }
    clock.lap("write");

    const Objectives obj = estimate_objectives(stats, cfg.model, cfg.grid());
    std::cout << "H_I = " << obj.H_I.value << " (se " << obj.H_I.se
              << "), H_B = " << obj.H_B.value << " (se " << obj.H_B.se
              << ")\n";

    RunManifest m;
    finish_manifest(m, cfg, clock, files, dir);
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    StageClock clock;
    const fs::path dir = ensure_out_dir(cfg);
    const std::vector<CheckReport> reports =
        run_all_checks(cfg.model, cfg.grid(), cfg.sim_config());
    clock.lap("verify");

    const fs::path checks = dir / "checks.json";
    write_check_reports_json(reports, checks.string());
    for (const CheckReport& r : reports) {
        std::printf("%-42s %s  statistic=%.6g tolerance=%.6g\n",
                    r.name.c_str(), r.pass ? "pass" : "FAIL", r.statistic,
                    r.tolerance);
    }
    RunManifest m;
    finish_manifest(m, cfg, clock, {checks}, dir);
    return suite_passes(reports) ? 0 : kExitChecks;
}

int cmd_report(const RunConfig& cfg) {
    StageClock clock;
    const fs::path dir = ensure_out_dir(cfg);
    const MeanFieldCoefficients mf = solve_mean_field(cfg.model, cfg.grid());
    const TraderCoefficients tc =
        solve_trader(cfg.model, cfg.trader_type, mf);
    clock.lap("solve");

    SimConfig sc = cfg.sim_config();
    // Figures need only the fully recorded sample paths.
    sc.n_paths = std::max<std::size_t>(cfg.n_full_paths, 2);
    const auto [ensemble, stats] =
        simulate_equilibrium(cfg.model, mf, tc, sc);
    clock.lap("simulate");

    const std::vector<fs::path> figs = {dir / "fig1.svg", dir / "fig2.svg",
                                        dir / "fig3.svg", dir / "fig4.svg"};
    write_figure1(ensemble, cfg.grid(), figs[0].string());
    write_figure2(mf, figs[1].string());
    write_figure3(tc, figs[2].string());
    write_figure4(ensemble, cfg.grid(), figs[3].string());
    clock.lap("figures");

    RunManifest m;
    finish_manifest(m, cfg, clock, figs, dir);
    std::cout << "wrote figures to " << dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field broker/trader equilibrium solver and simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    app.allow_extras();

    std::string config_path, out_dir, grid_M, n_paths, seed;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--grid.M", grid_M, "time steps");
    app.add_option("--sim.n_paths", n_paths, "Monte Carlo paths");

    CLI::App* solve = app.add_subcommand("solve", "solve the coefficients");
    CLI::App* simulate =
        app.add_subcommand("simulate", "Monte Carlo at the equilibrium");
    CLI::App* verify = app.add_subcommand("verify", "run the check suite");
    CLI::App* report = app.add_subcommand("report", "emit SVG figures");
    for (CLI::App* sub : {solve, simulate, verify, report})
        sub->allow_extras();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg =
            config_path.empty() ? default_config() : load_config(config_path);
        if (!seed.empty()) apply_override(cfg, "sim.seed", seed);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!grid_M.empty()) apply_override(cfg, "grid.M", grid_M);
        if (!n_paths.empty()) apply_override(cfg, "sim.n_paths", n_paths);
        CLI::App* sub = app.get_subcommands().front();
        apply_extras(cfg, app.remaining(true));

        const ValidationReport v = validate_params(cfg.model);
        if (!v.ok()) {
            std::cerr << "parameter validation failed: " << v.first_failure()
                      << "\n";
            return kExitValidation;
        }
        if (!cfg.trader_type.valid()) {
            std::cerr << "parameter validation failed: trader type\n";
            return kExitValidation;
        }

        if (sub == solve) return cmd_solve(cfg);
        if (sub == simulate) return cmd_simulate(cfg);
        if (sub == verify) return cmd_verify(cfg);
        return cmd_report(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
