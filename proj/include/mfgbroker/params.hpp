#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfgb {

// Market and preference constants of the mean-field problem. Immutable after
// construction; shareable across threads.
struct ModelParams {
    double k_alpha = 5.0;      // mean-reversion rate of the common signal
    double sigma_alpha = 1.0;  // common-signal volatility
    double sigma_S = 1.0;      // price volatility
    double b = 1e-3;           // permanent price impact of the broker
    double eta_I = 1e-3;       // broker-to-trader transaction cost
    double eta_B = 1.2e-3;     // lit-market transaction cost
    double a_B = 1.0;          // broker terminal inventory penalty
    double phi_B = 1e-2;       // broker running inventory penalty
    double a_bar = 1.0;        // mean trader terminal penalty
    double phi_bar = 1e-2;     // mean trader running penalty
    double T = 1.0;            // trading horizon
    double S0 = 100.0;         // initial price
    double alpha0 = 0.0;       // initial common signal
};

// Idiosyncratic parameters of one informed trader.
struct TraderType {
    double k_I = 5.0;      // private-signal mean-reversion rate
    double sigma_I = 0.5;  // private-signal volatility
    double a_I = 1.0;      // terminal inventory penalty
    double phi_I = 1e-2;   // running inventory penalty

    bool valid() const {
        return k_I > 0.0 && sigma_I >= 0.0 && a_I > 0.0 && phi_I > 0.0;
    }
    bool operator==(const TraderType&) const = default;
};

struct ValidationCheck {
    std::string name;  // the inequality being checked
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool ok() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    std::string first_failure() const {
        for (const auto& c : checks)
            if (!c.pass) return c.name;
        return {};
    }
};

// Checks the standing assumptions on the model parameters. Pure: same input
// produces an identical report. A failing report blocks equilibrium solving.
ValidationReport validate_params(const ModelParams& p);

// Uniform discretization of [0, T] with M steps and M+1 nodes.
class TimeGrid {
  public:
    TimeGrid(double T, std::size_t M);

    double horizon() const { return T_; }
    std::size_t steps() const { return M_; }
    std::size_t nodes() const { return M_ + 1; }
    double dt() const { return h_; }
    double t(std::size_t k) const { return static_cast<double>(k) * h_; }

    bool operator==(const TimeGrid&) const = default;

  private:
    double T_;
    std::size_t M_;
    double h_;
};

inline TimeGrid make_grid(double T, std::size_t M) { return TimeGrid(T, M); }

// Joint distribution of trader types. Moment-matched at construction: the
// sampled (k_I, sigma_I, a_I, phi_I) have the requested means for both the
// point-mass and the lognormal kind.
class TypeDistribution {
  public:
    enum class Kind { PointMass, Lognormal };

    // mean: the mean type; log_sd: dispersion of each coordinate on the log
    // scale (ignored for the point-mass kind).
    TypeDistribution(Kind kind, const TraderType& mean, double log_sd = 0.25);

    Kind kind() const { return kind_; }
    const TraderType& mean() const { return mean_; }
    double log_sd() const { return log_sd_; }

    // Deterministic draw indexed by (seed, index).
    TraderType sample(std::uint64_t seed, std::uint64_t index) const;

  private:
    Kind kind_;
    TraderType mean_;
    double log_sd_;
};

}  // namespace mfgb
