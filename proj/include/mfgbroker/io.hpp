#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfgbroker/simulator.hpp"
#include "mfgbroker/verification.hpp"

namespace mfgb {

// Full run configuration, ingested from a flat JSON file with dot-path CLI
// overrides (e.g. --model.b 0.001).
struct RunConfig {
    ModelParams model;
    std::size_t grid_M = 10000;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    Measure measure = Measure::Broker;
    std::size_t record_every = 100;
    std::size_t n_full_paths = 10;
    std::size_t N = 0;
    std::string type_kind = "point-mass";  // or "lognormal"
    double type_log_sd = 0.25;
    TraderType trader_type;
    std::string out_dir = "out";

    TimeGrid grid() const { return TimeGrid(model.T, grid_M); }
    SimConfig sim_config() const;
    TypeDistribution type_distribution() const;
};

RunConfig load_config(const std::string& path);
RunConfig default_config();
std::string config_to_json(const RunConfig& cfg);
// Applies a dot-path override ("model.b", "sim.n_paths", "grid.M", ...).
void apply_override(RunConfig& cfg, const std::string& key,
                    const std::string& value);

// 64-bit FNV-1a over file bytes, hex-encoded; used for manifest entries.
std::string file_hash(const std::string& path);

struct ManifestEntry {
    std::string file;
    std::string hash;
};

struct RunManifest {
    std::string config_json;
    std::uint64_t seed = 0;
    std::string tool_version;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::vector<ManifestEntry> files;
};

void write_manifest(const RunManifest& m, const std::string& path);

// CSV output. Numbers are written with 17 significant digits so they
// round-trip bit-exactly.
void write_stats_csv(const EnsembleStats& stats, const std::string& path);
void write_paths_csv(const PathEnsemble& ensemble, const TimeGrid& grid,
                     const std::string& path);
void write_check_reports_json(const std::vector<CheckReport>& reports,
                              const std::string& path);

// Minimal pure-geometry SVG line charts (no external renderer).
struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<double> x, y;
};

struct SvgPanel {
    std::string title;
    std::vector<SvgSeries> series;
};

void write_svg_grid(const std::vector<SvgPanel>& panels, int cols,
                    const std::string& path);

// The four report figures.
void write_figure1(const PathEnsemble& ensemble, const TimeGrid& grid,
                   const std::string& path);
void write_figure2(const MeanFieldCoefficients& mf, const std::string& path);
void write_figure3(const TraderCoefficients& tc, const std::string& path);
void write_figure4(const PathEnsemble& ensemble, const TimeGrid& grid,
                   const std::string& path);

}  // namespace mfgb
