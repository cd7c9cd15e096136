#include "mfgbroker/ode.hpp"

#include <Eigen/Dense>

namespace mfgb {

MatrixRiccatiProblem MatrixRiccatiProblem::from_params(const ModelParams& p,
                                                       const TimeGrid& grid) {
    MatrixRiccatiProblem prob{Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero(),
                              Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero(),
                              grid};
    prob.U << 1.0, -1.0, 0.0, 1.0;
    prob.Y << 0.0, p.b / (2.0 * p.eta_B), p.b / (2.0 * p.eta_I), 0.0;
    prob.Q << -p.phi_B / p.eta_B, 0.0, 0.0, -p.phi_bar / p.eta_I;
    prob.S << (2.0 * p.a_B - p.b) / (2.0 * p.eta_B), 0.0, 0.0,
        p.a_bar / p.eta_I;
    return prob;
}

Matrix2Path solve_mrde_direct(const MatrixRiccatiProblem& prob,
                              std::size_t substeps) {
    if (substeps == 0) throw std::invalid_argument("substeps must be >= 1");
    const TimeGrid& grid = prob.grid;
    const double hs = grid.dt() / static_cast<double>(substeps);
    Matrix2Path out{grid, std::vector<Eigen::Matrix2d>(grid.nodes(), prob.S)};
    // 0 = P' + Y P - P U P - Q  =>  P' = P U P + Q - Y P.
    auto rhs = [&](const Eigen::Matrix2d& P) -> Eigen::Matrix2d {
        return P * prob.U * P + prob.Q - prob.Y * P;
    };
    Eigen::Matrix2d P = prob.S;
    for (std::size_t k = grid.steps(); k-- > 0;) {
        for (std::size_t j = 0; j < substeps; ++j) {
            const Eigen::Matrix2d k1 = rhs(P);
            const Eigen::Matrix2d k2 = rhs(P - 0.5 * hs * k1);
            const Eigen::Matrix2d k3 = rhs(P - 0.5 * hs * k2);
            const Eigen::Matrix2d k4 = rhs(P - hs * k3);
            P = P - (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!P.allFinite())
            throw SolverError("blow-up: non-finite MRDE value at node " +
                              std::to_string(k));
        out.values[k] = P;
    }
    return out;
}

Matrix2Path solve_mrde_linearized(const MatrixRiccatiProblem& prob) {
    const TimeGrid& grid = prob.grid;
    const double h = grid.dt();
    // With P = T R^{-1}, the flow d/dt (R; T) = [[0, -U], [Q, -Y]] (R; T)
    // from terminal data (I, S) reproduces P' = P U P + Q - Y P.
    Eigen::Matrix4d L = Eigen::Matrix4d::Zero();
    L.block<2, 2>(0, 2) = -prob.U;
    L.block<2, 2>(2, 0) = prob.Q;
    L.block<2, 2>(2, 2) = -prob.Y;

    Eigen::Matrix<double, 4, 2> Z;
    Z.block<2, 2>(0, 0) = Eigen::Matrix2d::Identity();
    Z.block<2, 2>(2, 0) = prob.S;

    Matrix2Path out{grid, std::vector<Eigen::Matrix2d>(grid.nodes(), prob.S)};
    auto extract = [&](const Eigen::Matrix<double, 4, 2>& z,
                       std::size_t node) -> Eigen::Matrix2d {
        const Eigen::Matrix2d R = z.block<2, 2>(0, 0);
        const Eigen::Matrix2d T = z.block<2, 2>(2, 0);
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(R);
        const double cond =
            svd.singularValues()(0) /
            std::max(svd.singularValues()(1), 1e-300);
        if (cond > 1e12)
            throw SolverError(
                "representation breakdown: R singular at node " +
                std::to_string(node));
        return T * R.inverse();
    };

    out.values[grid.steps()] = extract(Z, grid.steps());
    for (std::size_t k = grid.steps(); k-- > 0;) {
        const Eigen::Matrix<double, 4, 2> k1 = L * Z;
        const Eigen::Matrix<double, 4, 2> k2 = L * (Z - 0.5 * h * k1);
        const Eigen::Matrix<double, 4, 2> k3 = L * (Z - 0.5 * h * k2);
        const Eigen::Matrix<double, 4, 2> k4 = L * (Z - h * k3);
        Z = Z - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!Z.allFinite())
            throw SolverError("blow-up: non-finite value at node " +
                              std::to_string(k));
        out.values[k] = extract(Z, k);
    }
    return out;
}

double closed_form_fbI(double t, const TraderType& tt, double eta_I,
                       double T) {
    const double gamma = std::sqrt(tt.phi_I / eta_I);
    const double tau = T - t;
    const double th = std::tanh(gamma * tau);
    const double sech2 = 1.0 - th * th;
    // particular solution plus the collapsed variation-of-constants term:
    //   int_t^T y_p = -log cosh(gamma tau),  int_t^T e^{2 int_u^T y_p} du
    //   = tanh(gamma tau) / gamma.
    return -gamma * th - sech2 / (eta_I / tt.a_I + th / gamma);
}

}  // namespace mfgb
