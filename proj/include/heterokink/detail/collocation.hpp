#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace heterokink::detail {

/// y'(s) = f(s, y, p) on [0, 1] with n states, np free scalars and n + np
/// boundary conditions g(y(0), y(1), p) = 0.
struct CollocationSystem {
    int n = 0;
    int np = 0;
    /// Leading components watched by mesh adaptation (-1 = all). Auxiliary
    /// integrals driven by non-smooth reference data are left out.
    int n_monitor = -1;
    /// Fills f and, when non-null, df/dy (n x n) and df/dp (n x np).
    std::function<void(double s, const Eigen::VectorXd& y, const Eigen::VectorXd& p, Eigen::VectorXd& f,
                       Eigen::MatrixXd* J, Eigen::MatrixXd* Jp)>
        rhs;
    std::function<Eigen::VectorXd(const Eigen::VectorXd& ya, const Eigen::VectorXd& yb, const Eigen::VectorXd& p)>
        bc;
};

struct CollocationConfig {
    double mesh_tol = 1e-9;      ///< per-interval interpolation error estimate
    double step_tol = 1e-10;     ///< scaled Newton update
    double residual_tol = 1e-9;  ///< max |collocation residual|
    int max_newton = 100;
    int max_nodes = 10000;
    int max_remesh = 30;
    double damping_floor = 0x1p-20;
    /// Widest allowed interval. Lobatto IIIA is not L-stable: fast modes on
    /// very wide intervals turn into near-neutral spurious modes.
    double max_interval = 1.0;
};

struct CollocationResult {
    std::vector<double> nodes;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> slopes;  ///< f at the nodes, for Hermite evaluation
    Eigen::VectorXd p;
    int newton_iters = 0;   ///< largest Newton count over the mesh rounds
    int remesh_rounds = 0;
    double max_residual = 0.0;
    double max_error_estimate = 0.0;
};

/// Three-stage Lobatto IIIA (Hermite-Simpson) collocation with damped Newton
/// and split/merge mesh adaptation. Throws NewtonDiverged or MeshBudget.
CollocationResult solve_collocation(const CollocationSystem& sys, std::vector<double> nodes,
                                    std::vector<Eigen::VectorXd> states, Eigen::VectorXd p,
                                    const CollocationConfig& config);

/// Cubic Hermite value on [s0, s1].
Eigen::VectorXd hermite_value(double s, double s0, double s1, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                              const Eigen::VectorXd& f0, const Eigen::VectorXd& f1);

/// Cubic Hermite derivative on [s0, s1].
Eigen::VectorXd hermite_slope(double s, double s0, double s1, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                              const Eigen::VectorXd& f0, const Eigen::VectorXd& f1);

}  // namespace heterokink::detail
