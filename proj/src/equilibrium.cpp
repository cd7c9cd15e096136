#include "mfgbroker/equilibrium.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>

namespace mfgb {

namespace {

// Joint backward state: the MRDE block P (mapped to g_b, g_c, h_b, h_c), the
// linear (h_a, g_a) pair, and optionally the four integrated trader
// coefficients (f_bI comes from the closed form). Integrating everything in
// one RK4 sweep means every stage evaluates the exact coefficient values at
// the stage time; interpolating the steep pre-terminal layer of the
// lower-level coefficients would otherwise cap the attainable accuracy.
struct JointState {
    Eigen::Matrix2d P;
    double h_a = 0.0, g_a = 0.0;
    double f_aI = 0.0, f_b = 0.0, f_c = 0.0, f_a = 0.0;
};

JointState operator+(const JointState& x, const JointState& y) {
    return {x.P + y.P,       x.h_a + y.h_a, x.g_a + y.g_a, x.f_aI + y.f_aI,
            x.f_b + y.f_b,   x.f_c + y.f_c, x.f_a + y.f_a};
}

JointState operator*(double s, const JointState& x) {
    return {s * x.P,   s * x.h_a, s * x.g_a, s * x.f_aI,
            s * x.f_b, s * x.f_c, s * x.f_a};
}

bool finite(const JointState& x) {
    return x.P.allFinite() && std::isfinite(x.h_a) && std::isfinite(x.g_a) &&
           std::isfinite(x.f_aI) && std::isfinite(x.f_b) &&
           std::isfinite(x.f_c) && std::isfinite(x.f_a);
}

struct JointSolution {
    std::vector<JointState> nodes;  // index k = grid node (time k h)
    double q_a_limit = 0.0;         // Richardson tail estimate of h_a/g_a at T
};

// Backward RK4 (in tau = T - t) over the whole coupled system. When tt is
// null the trader block stays zero and costs nothing meaningful.
JointSolution integrate_joint(const ModelParams& p, const TraderType* tt,
                              const TimeGrid& grid, std::size_t substeps) {
    if (substeps == 0) throw std::invalid_argument("substeps must be >= 1");
    const auto prob = MatrixRiccatiProblem::from_params(p, grid);
    const double T = grid.horizon();
    const double hs = grid.dt() / static_cast<double>(substeps);

    auto rhs = [&](double tau, const JointState& y) -> JointState {
        JointState d;
        // dP/dtau = -(P U P + Q - Y P).
        d.P = -(y.P * prob.U * y.P + prob.Q - prob.Y * y.P);
        const double hc = -y.P(0, 0), hb = -y.P(0, 1);
        const double gc = -y.P(1, 0), gb = -y.P(1, 1);
        // 0 = dh_a + [(h_c - k) h_a + (h_b - h_c + b/2eta_B) g_a
        //             + 1/2eta_B] dt, and symmetrically for g_a.
        d.h_a = (hc - p.k_alpha) * y.h_a +
                (hb - hc + p.b / (2.0 * p.eta_B)) * y.g_a +
                1.0 / (2.0 * p.eta_B);
        d.g_a = (gc + p.b / (2.0 * p.eta_I)) * y.h_a +
                (gb - gc - p.k_alpha) * y.g_a + 1.0 / (2.0 * p.eta_I);
        if (tt != nullptr) {
            const double fbI = closed_form_fbI(T - tau, *tt, p.eta_I, T);
            d.f_aI = (fbI - tt->k_I) * y.f_aI + 1.0 / (2.0 * p.eta_I);
            d.f_b = (gb + fbI) * y.f_b + (hb - gb) * y.f_c +
                    p.b * hb / (2.0 * p.eta_I);
            d.f_c = gc * y.f_b + (hc - gc + fbI) * y.f_c +
                    p.b * hc / (2.0 * p.eta_I);
            d.f_a = (fbI - p.k_alpha) * y.f_a + y.f_b * y.g_a +
                    y.f_c * (y.h_a - y.g_a) +
                    (p.b * y.h_a + 1.0) / (2.0 * p.eta_I);
        }
        return d;
    };

    JointSolution sol;
    sol.nodes.resize(grid.nodes());
    JointState y;
    y.P = prob.S;
    sol.nodes[grid.steps()] = y;

    double q1 = 0.0, q2 = 0.0;  // h_a/g_a at tau = hs and 2 hs
    double tau = 0.0;
    for (std::size_t k = grid.steps(); k-- > 0;) {
        for (std::size_t j = 0; j < substeps; ++j) {
            const JointState k1 = rhs(tau, y);
            const JointState k2 = rhs(tau + 0.5 * hs, y + 0.5 * hs * k1);
            const JointState k3 = rhs(tau + 0.5 * hs, y + 0.5 * hs * k2);
            const JointState k4 = rhs(tau + hs, y + hs * k3);
            y = y + (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            tau += hs;
            if (k == grid.steps() - 1 && j == 0) q1 = y.h_a / y.g_a;
            if (k == grid.steps() - 1 && j == 1) q2 = y.h_a / y.g_a;
        }
        if (!finite(y))
            throw SolverError("blow-up: non-finite value at node " +
                              std::to_string(k));
        sol.nodes[k] = y;
    }
    // Both h_a and g_a vanish linearly at T, so the ratio near T is the
    // limit plus an O(tau) slope; one Richardson step on the two closest
    // refined tail nodes removes that slope.
    sol.q_a_limit = substeps >= 2 ? 2.0 * q1 - q2 : q1;
    return sol;
}

}  // namespace

MeanFieldCoefficients solve_mean_field(const ModelParams& p,
                                       const TimeGrid& grid,
                                       std::size_t substeps) {
    const ValidationReport report = validate_params(p);
    if (!report.ok())
        throw std::invalid_argument("solve_mean_field: invalid parameters: " +
                                    report.first_failure());

    const JointSolution sol = integrate_joint(p, nullptr, grid, substeps);

    auto sp = [&] {
        return ScalarPath{grid, std::vector<double>(grid.nodes())};
    };
    MeanFieldCoefficients mf{grid, sp(), sp(), sp(), sp(),
                             sp(),  sp(), sp(), 0.0};

    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const JointState& y = sol.nodes[k];
        // P = -[[h_c, h_b], [g_c, g_b]].
        mf.h_c.values[k] = -y.P(0, 0);
        mf.h_b.values[k] = -y.P(0, 1);
        mf.g_c.values[k] = -y.P(1, 0);
        mf.g_b.values[k] = -y.P(1, 1);
        mf.h_a.values[k] = y.h_a;
        mf.g_a.values[k] = y.g_a;
        mf.q_a.values[k] =
            y.g_a != 0.0 ? y.h_a / y.g_a
                         : std::numeric_limits<double>::quiet_NaN();
    }
    // Both h_a and g_a vanish at T; the limit of the ratio is the ratio of
    // the terminal slopes, eta_I / eta_B.
    mf.q_a.values[grid.steps()] = p.eta_I / p.eta_B;
    mf.q_a_limit = sol.q_a_limit;
    return mf;
}

TraderCoefficients solve_trader(const ModelParams& p, const TraderType& tt,
                                const MeanFieldCoefficients& mf,
                                std::size_t substeps) {
    if (!tt.valid())
        throw std::invalid_argument("solve_trader: invalid trader type");
    const TimeGrid& grid = mf.grid;
    const double T = grid.horizon();

    const JointSolution sol = integrate_joint(p, &tt, grid, substeps);

    auto sp = [&] {
        return ScalarPath{grid, std::vector<double>(grid.nodes())};
    };
    TraderCoefficients tc{grid, tt, sp(), sp(), sp(), sp(), sp()};

    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const JointState& y = sol.nodes[k];
        tc.f_a.values[k] = y.f_a;
        tc.f_aI.values[k] = y.f_aI;
        tc.f_b.values[k] = y.f_b;
        tc.f_bI.values[k] = closed_form_fbI(grid.t(k), tt, p.eta_I, T);
        tc.f_c.values[k] = y.f_c;
    }
    return tc;
}

namespace {

void require_in_horizon(double t, const TimeGrid& grid) {
    if (t < 0.0 || t > grid.horizon())
        throw std::out_of_range("time outside [0, T]");
}

}  // namespace

double broker_speed(const MeanFieldCoefficients& mf, const MarketState& s) {
    require_in_horizon(s.t, mf.grid);
    return mf.h_a.eval(s.t) * s.alpha + mf.h_b.eval(s.t) * s.Q_bar +
           mf.h_c.eval(s.t) * s.Q_barB;
}

double mean_field_speed(const MeanFieldCoefficients& mf,
                        const MarketState& s) {
    require_in_horizon(s.t, mf.grid);
    return mf.g_a.eval(s.t) * s.alpha + mf.g_b.eval(s.t) * s.Q_bar +
           mf.g_c.eval(s.t) * s.Q_barB;
}

double trader_speed(const TraderCoefficients& tc, const MarketState& s) {
    require_in_horizon(s.t, tc.grid);
    return tc.f_a.eval(s.t) * s.alpha + tc.f_aI.eval(s.t) * s.alpha_I +
           tc.f_b.eval(s.t) * s.Q_bar + tc.f_bI.eval(s.t) * s.Q_I +
           tc.f_c.eval(s.t) * s.Q_barB;
}

double externalisation_rate(const MeanFieldCoefficients& mf, double t) {
    require_in_horizon(t, mf.grid);
    if (t >= mf.grid.horizon()) return mf.q_a.values.back();
    const double ga = mf.g_a.eval(t);
    if (ga == 0.0 || !std::isfinite(mf.h_a.eval(t) / ga))
        throw SolverError("externalisation rate undefined: g_a vanishes");
    return mf.h_a.eval(t) / ga;
}

namespace {

void write_csv(const TimeGrid& grid,
               const std::vector<std::pair<std::string, const ScalarPath*>>&
                   columns,
               const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "t";
    for (const auto& [name, _] : columns) out << "," << name;
    out << "\n";
    char buf[32];
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", grid.t(k));
        out << buf;
        for (const auto& [_, col] : columns) {
            std::snprintf(buf, sizeof(buf), "%.17g", col->values[k]);
            out << "," << buf;
        }
        out << "\n";
    }
}

}  // namespace

void write_mean_field_csv(const MeanFieldCoefficients& mf,
                          const std::string& path) {
    write_csv(mf.grid,
              {{"g_a", &mf.g_a},
               {"g_b", &mf.g_b},
               {"g_c", &mf.g_c},
               {"h_a", &mf.h_a},
               {"h_b", &mf.h_b},
               {"h_c", &mf.h_c},
               {"q_a", &mf.q_a}},
              path);
}

void write_trader_csv(const TraderCoefficients& tc, const std::string& path) {
    write_csv(tc.grid,
              {{"f_a", &tc.f_a},
               {"f_aI", &tc.f_aI},
               {"f_b", &tc.f_b},
               {"f_bI", &tc.f_bI},
               {"f_c", &tc.f_c}},
              path);
}

const TraderCoefficients& TraderCoefficientCache::get(const TraderType& tt) {
    const auto key = std::make_tuple(tt.k_I, tt.sigma_I, tt.a_I, tt.phi_I);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end())
        it = cache_.emplace(key, solve_trader(p_, tt, mf_, substeps_)).first;
    return it->second;
}

}  // namespace mfgb
