#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfgbroker/params.hpp"

namespace mfgb {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A function of time discretized on a TimeGrid: one value per node.
template <class T>
struct CoefficientPath {
    TimeGrid grid;
    std::vector<T> values;  // size grid.nodes()

    const T& at(std::size_t k) const { return values[k]; }

    // Linear interpolation between grid nodes; clamped to [0, T].
    T eval(double t) const {
        const double h = grid.dt();
        if (t <= 0.0) return values.front();
        if (t >= grid.horizon()) return values.back();
        const double s = t / h;
        auto k = static_cast<std::size_t>(s);
        if (k >= grid.steps()) k = grid.steps() - 1;
        const double w = s - static_cast<double>(k);
        return values[k] * (1.0 - w) + values[k + 1] * w;
    }
};

using ScalarPath = CoefficientPath<double>;
using Matrix2Path = CoefficientPath<Eigen::Matrix2d>;
using Vector2Path = CoefficientPath<Eigen::Vector2d>;

// The matrix Riccati problem 0 = dP/dt + Y P - P U P - Q with P(T) = S.
struct MatrixRiccatiProblem {
    Eigen::Matrix2d U, Y, Q, S;
    TimeGrid grid;

    static MatrixRiccatiProblem from_params(const ModelParams& p,
                                            const TimeGrid& grid);
};

// Backward classical RK4 on the Riccati equation itself, with a fixed number
// of uniform substeps per grid step (the terminal data is of size a/eta and
// decays on that same scale, so plain grid-step RK4 loses several digits in
// the last few nodes). Throws SolverError ("blow-up") naming the first
// non-finite node.
Matrix2Path solve_mrde_direct(const MatrixRiccatiProblem& prob,
                              std::size_t substeps = 32);

// Integrates the linearized 4x4 system for (R, T) backward from (I, S) and
// returns T R^{-1} per node. Cross-check path for solve_mrde_direct. Throws
// SolverError ("representation breakdown") when R becomes numerically
// singular (condition number > 1e12).
Matrix2Path solve_mrde_linearized(const MatrixRiccatiProblem& prob);

namespace detail {

template <class T>
bool all_finite(const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
        return std::isfinite(v);
    } else {
        return v.allFinite();
    }
}

}  // namespace detail

// Solves 0 = dX + (A(t) X + c(t)) dt, i.e. dX/dt = -(A(t) X + c(t)) read
// forward, backward in time from X(T) = terminal with classical RK4 and a
// fixed number of uniform substeps per grid step. Every linear coefficient
// ODE in the equilibrium has this shape. A and c are callables of t;
// time-varying grid coefficients are passed through CoefficientPath::eval,
// which interpolates linearly at intermediate stage times.
template <class Vec, class Mat>
CoefficientPath<Vec> integrate_linear_backward(
    const std::function<Mat(double)>& A, const std::function<Vec(double)>& c,
    const Vec& terminal, const TimeGrid& grid, std::size_t substeps = 1) {
    if (substeps == 0) throw std::invalid_argument("substeps must be >= 1");
    const double hs = grid.dt() / static_cast<double>(substeps);
    CoefficientPath<Vec> out{grid, std::vector<Vec>(grid.nodes(), terminal)};
    auto rhs = [&](double t, const Vec& x) -> Vec { return -(A(t) * x + c(t)); };
    Vec x = terminal;
    for (std::size_t k = grid.steps(); k-- > 0;) {
        for (std::size_t j = 0; j < substeps; ++j) {
            const double t1 = grid.t(k + 1) - hs * static_cast<double>(j);
            const Vec k1 = rhs(t1, x);
            const Vec k2 = rhs(t1 - 0.5 * hs, x - 0.5 * hs * k1);
            const Vec k3 = rhs(t1 - 0.5 * hs, x - 0.5 * hs * k2);
            const Vec k4 = rhs(t1 - hs, x - hs * k3);
            x = x - (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!detail::all_finite(x))
            throw SolverError("blow-up: non-finite value at node " +
                              std::to_string(k));
        out.values[k] = x;
    }
    return out;
}

// Scalar overload (Mat and Vec both double).
inline ScalarPath integrate_linear_backward(
    const std::function<double(double)>& A,
    const std::function<double(double)>& c, double terminal,
    const TimeGrid& grid, std::size_t substeps = 1) {
    return integrate_linear_backward<double, double>(A, c, terminal, grid,
                                                     substeps);
}

// Closed form for the trader's own-inventory loading f^{b,I}. With
// gamma = sqrt(phi_I / eta_I) and tau = T - t:
//   f^{b,I}(t) = -gamma tanh(gamma tau)
//                - sech^2(gamma tau) / (eta_I/a_I + tanh(gamma tau)/gamma).
// The inner integrals of the variation-of-constants representation are
// evaluated in closed form; no quadrature.
double closed_form_fbI(double t, const TraderType& tt, double eta_I, double T);

}  // namespace mfgb
