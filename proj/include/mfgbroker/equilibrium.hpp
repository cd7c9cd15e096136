#pragma once

#include <map>
#include <mutex>
#include <string>

#include "mfgbroker/ode.hpp"
#include "mfgbroker/params.hpp"

namespace mfgb {

// Deterministic coefficient functions of the mean-field equilibrium. The
// broker trades at  nu^B = h_a alpha + h_b Qbar + h_c QbarB  and the average
// trader at  nubar = g_a alpha + g_b Qbar + g_c QbarB.
struct MeanFieldCoefficients {
    TimeGrid grid;
    ScalarPath g_a, g_b, g_c;
    ScalarPath h_a, h_b, h_c;
    ScalarPath q_a;  // externalisation rate h_a/g_a, q_a(T) = eta_I/eta_B

    // One-sided limit of h_a/g_a at T estimated from the refined tail of the
    // backward integration (Richardson-extrapolated); cross-checks the stored
    // L'Hopital value eta_I/eta_B.
    double q_a_limit = 0.0;
};

// Coefficients of an individual trader's strategy
//   nu^I = f_a alpha + f_aI alpha^I + f_b Qbar + f_bI Q^I + f_c QbarB.
struct TraderCoefficients {
    TimeGrid grid;
    TraderType trader_type;
    ScalarPath f_a, f_aI, f_b, f_bI, f_c;
};

struct MarketState {
    double t = 0.0;
    double alpha = 0.0;
    double alpha_I = 0.0;  // private signal, trader-level evaluation only
    double Q_bar = 0.0;    // mean trader inventory
    double Q_I = 0.0;      // individual trader inventory
    double Q_barB = 0.0;   // broker per-client inventory
};

// Solves the MRDE for (g_b, g_c, h_b, h_c), then the linear (h_a, g_a)
// system, then the externalisation rate. Requires validate_params to pass.
// The MRDE and the (h_a, g_a) system are integrated jointly so the RK4
// stages of the linear system see exact (not interpolated) P values;
// `substeps` refines each grid step uniformly.
MeanFieldCoefficients solve_mean_field(const ModelParams& p,
                                       const TimeGrid& grid,
                                       std::size_t substeps = 32);

// Solves the five trader coefficient ODEs in dependency order:
// f_bI (closed form) -> f_aI -> (f_b, f_c) -> f_a. The linear equations are
// integrated jointly with the mean-field system (re-derived from p on mf's
// grid), again so every RK4 stage sees exact coefficient values.
TraderCoefficients solve_trader(const ModelParams& p, const TraderType& tt,
                                const MeanFieldCoefficients& mf,
                                std::size_t substeps = 32);

double broker_speed(const MeanFieldCoefficients& mf, const MarketState& s);
double mean_field_speed(const MeanFieldCoefficients& mf, const MarketState& s);
double trader_speed(const TraderCoefficients& tc, const MarketState& s);

// q_a(t) = h_a(t)/g_a(t); at t = T the stored limit eta_I/eta_B. Throws
// SolverError if g_a vanishes at the nearest node.
double externalisation_rate(const MeanFieldCoefficients& mf, double t);

// Writes t, g_a, g_b, g_c, h_a, h_b, h_c, q_a (one row per node, 17
// significant digits) to `path`.
void write_mean_field_csv(const MeanFieldCoefficients& mf,
                          const std::string& path);
void write_trader_csv(const TraderCoefficients& tc, const std::string& path);

// Per-type cache so that the finite-N game solves each distinct type once.
class TraderCoefficientCache {
  public:
    TraderCoefficientCache(const ModelParams& p,
                           const MeanFieldCoefficients& mf,
                           std::size_t substeps = 32)
        : p_(p), mf_(mf), substeps_(substeps) {}

    const TraderCoefficients& get(const TraderType& tt);

  private:
    ModelParams p_;
    const MeanFieldCoefficients& mf_;
    std::size_t substeps_;
    std::map<std::tuple<double, double, double, double>, TraderCoefficients>
        cache_;
    std::mutex mutex_;
};

}  // namespace mfgb
