#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mfgbroker/equilibrium.hpp"
#include "mfgbroker/params.hpp"
#include "mfgbroker/rng.hpp"

namespace mfgb {

// Measure under which the price drift is simulated.
enum class Measure { Broker, Trader, Reference };

std::string to_string(Measure m);
Measure measure_from_string(const std::string& s);

struct SimConfig {
    explicit SimConfig(TimeGrid g) : grid(g) {}

    std::size_t n_paths = 10000;
    TimeGrid grid;
    std::uint64_t seed = 1;
    Measure measure = Measure::Broker;
    std::size_t record_every = 1;   // node stride for stats output
    std::size_t n_full_paths = 10;  // paths kept at full resolution
    std::size_t N = 0;              // finite-N population size
    bool empirical_feedback = false;  // finite-N traders see the empirical
                                      // average instead of the theoretical one
    TypeDistribution type_dist{TypeDistribution::Kind::PointMass, TraderType{}};
};

// Exact transition of dX = -k X dt + sigma dW over one step of size h.
inline double ou_step(double x, double k, double sigma, double h, double z) {
    const double decay = std::exp(-k * h);
    const double sd = sigma * std::sqrt((1.0 - decay * decay) / (2.0 * k));
    return x * decay + sd * z;
}

// Signal draws and Brownian increments of one path. Signals use the exact
// OU transition. When increments are kept, the per-step transition noise is
// drawn jointly with the Brownian increment of the same interval (the
// innovation is c1 dW + c2 z with c1, c2 matching the exact covariance), so
// drift-residual checks see increments consistent with the signal path.
struct SimPath {
    std::vector<double> alpha, alpha_I;        // per node
    std::vector<double> dW_alpha, dW_I, dW_S;  // per step; may be empty
};

SimPath draw_signals(const ModelParams& p, const TraderType& tt,
                     const TimeGrid& grid, std::uint64_t seed,
                     std::uint64_t path, bool with_increments = false);

// Equilibrium state trajectory along given signals: speeds from the solved
// coefficients, inventories by explicit Euler.
struct EquilibriumPath {
    std::vector<double> nu_bar, nu_B, nu_I;      // per node
    std::vector<double> Q_bar, Q_barB, Q_I;      // per node
};

EquilibriumPath evolve_equilibrium(const MeanFieldCoefficients& mf,
                                   const TraderCoefficients& tc,
                                   const TimeGrid& grid, const SimPath& sig);

// One fully recorded path (used for figures and the FBSDE residual checks).
struct PathRecord {
    std::size_t path_id = 0;
    SimPath signals;
    EquilibriumPath states;
    std::vector<double> S, X_I, X_barB;  // per node
};

struct ColumnStats {
    std::vector<double> mean, sd, se;  // per recorded node
};

struct EnsembleStats {
    std::vector<double> t;  // recorded node times
    std::map<std::string, ColumnStats> columns;
    // Per-path running-integral objective estimates (trader form; broker form
    // excluding the eta_I second-moment term, which is cross-path).
    std::vector<double> HI_path, HB_path;
    std::vector<double> nuI_sq_mean;  // per node, cross-path mean of (nu^I)^2
    std::vector<double> nuI_mean;     // per node, cross-path mean of nu^I
    std::size_t n_paths = 0;
};

struct PathEnsemble {
    std::vector<PathRecord> sample_paths;  // first n_full_paths, full detail
};

// Monte Carlo over cfg.n_paths independent paths. Deterministic for fixed
// (seed, grid, n_paths) regardless of MFG_THREADS.
std::pair<PathEnsemble, EnsembleStats> simulate_equilibrium(
    const ModelParams& p, const MeanFieldCoefficients& mf,
    const TraderCoefficients& tc, const SimConfig& cfg);

struct ObjectiveEstimate {
    double value = 0.0;
    double se = 0.0;
};

struct Objectives {
    ObjectiveEstimate H_I, H_B;
};

Objectives estimate_objectives(const EnsembleStats& stats,
                               const ModelParams& p, const TimeGrid& grid);

// Finite-N game: one common-signal path, N sampled trader types playing the
// mean-field strategy against the theoretical mean-field inventory (or the
// empirical average when cfg.empirical_feedback is set).
struct ChaosReport {
    std::size_t N = 0;
    double sup_gap = 0.0;  // sup_t |empirical average speed - nubar*|
    double rms_gap = 0.0;
};

ChaosReport simulate_finite_N(const ModelParams& p,
                              const MeanFieldCoefficients& mf,
                              TraderCoefficientCache& cache,
                              const SimConfig& cfg);

// Worker count: min(hardware, MFG_THREADS if set). Results never depend on it.
unsigned worker_count();

}  // namespace mfgb
