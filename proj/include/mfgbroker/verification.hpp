#pragma once

#include <string>
#include <vector>

#include "mfgbroker/equilibrium.hpp"
#include "mfgbroker/simulator.hpp"

namespace mfgb {

// A square-integrable direction in control space, realized per simulation
// path.
struct PerturbationDirection {
    enum class Kind { IntervalIndicator, SignalMimic, Constant, WhiteNoise };

    Kind kind = Kind::Constant;
    double t0 = 0.0, t1 = 0.0;  // interval endpoints (IntervalIndicator)
    double scale = 1.0;
    std::string name;
};

// The default direction set: two interval indicators, the common signal
// itself, a constant, and an independent white-noise path.
std::vector<PerturbationDirection> default_directions(double T);

struct CheckReport {
    std::string name;
    double statistic = 0.0;
    double tolerance = 0.0;
    bool pass = false;  // statistic within tolerance (inverted for the
                        // negative control, whose name marks it)
    std::string diagnostics;

    bool negative_control() const {
        return name.find("negative-control") != std::string::npos;
    }
};

// Sup over interior nodes of the centered finite-difference residual of all
// eleven printed coefficient ODEs.
CheckReport check_ode_residuals(const MeanFieldCoefficients& mf,
                                const TraderCoefficients& tc,
                                const ModelParams& p, double tolerance = 1e-6);

// FBSDE drift residuals along simulated paths with stored Brownian
// increments: Euler-order shrinkage when h halves, plus the pathwise
// terminal identity 2 eta_I nu^I_T = -2 a_I Q^I_T.
std::vector<CheckReport> check_fbsde_drift(const ModelParams& p,
                                           const MeanFieldCoefficients& mf,
                                           const TraderCoefficients& tc,
                                           const SimConfig& cfg);

// Pathwise concavity gap of both functionals over random control pairs; the
// sum-of-squares gap must be nonnegative on every single path and must match
// the direct three-point evaluation of the objective integrand.
std::vector<CheckReport> check_concavity(const ModelParams& p,
                                         const SimConfig& cfg,
                                         std::size_t n_pairs);

// Monte Carlo Gateaux derivatives at the equilibrium (trader and broker inner
// expressions) for each direction, in standard-error units; includes the
// scaled-coefficient negative control, which must exceed 5 SE.
std::vector<CheckReport> check_gateaux(
    const ModelParams& p, const MeanFieldCoefficients& mf,
    const TraderCoefficients& tc,
    const std::vector<PerturbationDirection>& directions, const SimConfig& cfg);

// Secant derivative of the simulated trader objective across +/- eps w with
// common random numbers; must be within 3 SE of zero at the equilibrium.
std::vector<CheckReport> check_gateaux_secant(
    const ModelParams& p, const MeanFieldCoefficients& mf,
    const TraderCoefficients& tc, const PerturbationDirection& direction,
    const SimConfig& cfg, const std::vector<double>& epsilons);

// MRDE direct vs linearized, and closed-form f^{b,I} vs a fine-grid RK4
// integration of the scalar Riccati equation.
std::vector<CheckReport> cross_check_solvers(const ModelParams& p,
                                             const TimeGrid& grid,
                                             const TraderType& tt);

// The full verify suite. Passes iff every regular check passes and the
// negative control fails (a passing negative control fails the suite).
std::vector<CheckReport> run_all_checks(const ModelParams& p,
                                        const TimeGrid& grid,
                                        const SimConfig& cfg);

bool suite_passes(const std::vector<CheckReport>& reports);

}  // namespace mfgb
