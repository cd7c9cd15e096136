#include "mfgbroker/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfgbroker/rng.hpp"

namespace mfgb {

namespace {

ValidationCheck positivity(const std::string& name, double value) {
    ValidationCheck c{name + " > 0", value > 0.0, {}};
    if (!c.pass) {
        std::ostringstream os;
        os << name << " = " << value;
        c.detail = os.str();
    }
    return c;
}

}  // namespace

ValidationReport validate_params(const ModelParams& p) {
    ValidationReport r;
    r.checks.push_back(positivity("k_alpha", p.k_alpha));
    r.checks.push_back({"sigma_alpha >= 0", p.sigma_alpha >= 0.0, {}});
    r.checks.push_back({"sigma_S >= 0", p.sigma_S >= 0.0, {}});
    r.checks.push_back(positivity("eta_I", p.eta_I));
    r.checks.push_back(positivity("eta_B", p.eta_B));
    r.checks.push_back(positivity("a_B", p.a_B));
    r.checks.push_back(positivity("phi_B", p.phi_B));
    r.checks.push_back(positivity("a_bar", p.a_bar));
    r.checks.push_back(positivity("phi_bar", p.phi_bar));
    r.checks.push_back(positivity("T", p.T));

    r.checks.push_back({"b >= 0", p.b >= 0.0, {}});
    r.checks.push_back({"2*a_B - b >= 0", 2.0 * p.a_B - p.b >= 0.0, {}});
    r.checks.push_back({"b <= 2*eta_B", p.b <= 2.0 * p.eta_B, {}});
    r.checks.push_back({"b <= 2*eta_I", p.b <= 2.0 * p.eta_I, {}});
    r.checks.push_back({"b <= 4*phi_B", p.b <= 4.0 * p.phi_B, {}});
    r.checks.push_back({"b <= 4*phi_bar", p.b <= 4.0 * p.phi_bar, {}});

    for (auto& c : r.checks) {
        if (!c.pass && c.detail.empty()) c.detail = "violated: " + c.name;
    }
    return r;
}

TimeGrid::TimeGrid(double T, std::size_t M) : T_(T), M_(M), h_(T / double(M)) {
    if (M < 2) throw std::invalid_argument("TimeGrid: M must be >= 2");
    if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: T must be > 0");
}

TypeDistribution::TypeDistribution(Kind kind, const TraderType& mean,
                                   double log_sd)
    : kind_(kind), mean_(mean), log_sd_(log_sd) {
    if (!mean.valid())
        throw std::invalid_argument("TypeDistribution: mean type not valid");
    if (kind == Kind::Lognormal && !(log_sd > 0.0))
        throw std::invalid_argument("TypeDistribution: log_sd must be > 0");
}

TraderType TypeDistribution::sample(std::uint64_t seed,
                                    std::uint64_t index) const {
    if (kind_ == Kind::PointMass) return mean_;
    // Lognormal with E[X] = m: X = m * exp(s Z - s^2/2).
    NormalStream stream(seed, kStreamTypes, index);
    const double s = log_sd_;
    const double shift = -0.5 * s * s;
    auto draw = [&](std::uint64_t i, double m) {
        return m * std::exp(s * stream.normal(i) + shift);
    };
    TraderType t;
    t.k_I = draw(0, mean_.k_I);
    t.sigma_I = draw(1, mean_.sigma_I);
    t.a_I = draw(2, mean_.a_I);
    t.phi_I = draw(3, mean_.phi_I);
    return t;
}

}  // namespace mfgb
