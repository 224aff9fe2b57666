#include "heterokink/detail/collocation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "heterokink/errors.hpp"

namespace heterokink::detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd hermite_value(double s, double s0, double s1, const VectorXd& y0, const VectorXd& y1, const VectorXd& f0,
                       const VectorXd& f1) {
    const double h = s1 - s0;
    const double t = (s - s0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * f0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * f1;
}

VectorXd hermite_slope(double s, double s0, double s1, const VectorXd& y0, const VectorXd& y1, const VectorXd& f0,
                       const VectorXd& f1) {
    const double h = s1 - s0;
    const double t = (s - s0) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y0 + (-6 * t2 + 6 * t) * y1) / h + (3 * t2 - 4 * t + 1) * f0 + (3 * t2 - 2 * t) * f1;
}

namespace {

struct NodeEval {
    VectorXd f;
    MatrixXd J, Jp;
};

class Discretization {
public:
    Discretization(const CollocationSystem& sys, const std::vector<double>& nodes) : sys_(sys), s_(nodes) {}

    int size() const { return sys_.n * static_cast<int>(s_.size()) + sys_.np; }

    VectorXd pack(const std::vector<VectorXd>& y, const VectorXd& p) const {
        VectorXd z(size());
        for (std::size_t i = 0; i < y.size(); ++i) z.segment(sys_.n * i, sys_.n) = y[i];
        z.tail(sys_.np) = p;
        return z;
    }

    void unpack(const VectorXd& z, std::vector<VectorXd>& y, VectorXd& p) const {
        y.resize(s_.size());
        for (std::size_t i = 0; i < s_.size(); ++i) y[i] = z.segment(sys_.n * i, sys_.n);
        p = z.tail(sys_.np);
    }

    /// Residual; with jac != nullptr also the sparse Jacobian.
    VectorXd residual(const VectorXd& z, Eigen::SparseMatrix<double>* jac) const {
        const int n = sys_.n, np = sys_.np;
        const int N = static_cast<int>(s_.size());
        const bool want = jac != nullptr;
        const VectorXd p = z.tail(np);
        auto y = [&](int i) { return z.segment(n * i, n); };

        std::vector<NodeEval> ev(N);
        for (int i = 0; i < N; ++i) {
            ev[i].f.resize(n);
            sys_.rhs(s_[i], y(i), p, ev[i].f, want ? &ev[i].J : nullptr, want ? &ev[i].Jp : nullptr);
        }

        VectorXd F(size());
        const VectorXd ya = y(0), yb = y(N - 1);
        F.head(n + np) = sys_.bc(ya, yb, p);

        std::vector<Eigen::Triplet<double>> trip;
        if (want) {
            trip.reserve(static_cast<std::size_t>(N) * n * (2 * n + np) + (n + np) * (2 * n + np));
            bc_jacobian(ya, yb, p, F.head(n + np), trip, N);
        }

        const int row0 = n + np;
        const int pcol = n * N;
        VectorXd fm(n);
        MatrixXd Jm, Jpm;
        for (int i = 0; i + 1 < N; ++i) {
            const double h = s_[i + 1] - s_[i];
            const VectorXd ym = 0.5 * (y(i) + y(i + 1)) - h / 8.0 * (ev[i + 1].f - ev[i].f);
            sys_.rhs(0.5 * (s_[i] + s_[i + 1]), ym, p, fm, want ? &Jm : nullptr, want ? &Jpm : nullptr);
            F.segment(row0 + n * i, n) = y(i + 1) - y(i) - h / 6.0 * (ev[i].f + 4.0 * fm + ev[i + 1].f);
            if (!want) continue;
            const MatrixXd I = MatrixXd::Identity(n, n);
            const MatrixXd dA = -I - h / 6.0 * (ev[i].J + 4.0 * Jm * (0.5 * I + h / 8.0 * ev[i].J));
            const MatrixXd dB = I - h / 6.0 * (ev[i + 1].J + 4.0 * Jm * (0.5 * I - h / 8.0 * ev[i + 1].J));
            const MatrixXd dP =
                -h / 6.0 * (ev[i].Jp + 4.0 * (Jpm - h / 8.0 * Jm * (ev[i + 1].Jp - ev[i].Jp)) + ev[i + 1].Jp);
            const int r = row0 + n * i;
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    if (dA(a, b) != 0.0) trip.emplace_back(r + a, n * i + b, dA(a, b));
                    if (dB(a, b) != 0.0) trip.emplace_back(r + a, n * (i + 1) + b, dB(a, b));
                }
                for (int b = 0; b < np; ++b)
                    if (dP(a, b) != 0.0) trip.emplace_back(r + a, pcol + b, dP(a, b));
            }
        }
        if (want) {
            jac->resize(size(), size());
            jac->setFromTriplets(trip.begin(), trip.end());
            jac->makeCompressed();
        }
        return F;
    }

private:
    void bc_jacobian(const VectorXd& ya, const VectorXd& yb, const VectorXd& p, const VectorXd& g0,
                     std::vector<Eigen::Triplet<double>>& trip, int N) const {
        const int n = sys_.n, np = sys_.np, m = n + np;
        auto column = [&](int col, const VectorXd& dg) {
            for (int r = 0; r < m; ++r)
                if (dg[r] != 0.0) trip.emplace_back(r, col, dg[r]);
        };
        (void)g0;
        for (int j = 0; j < n; ++j) {
            const double e = 1e-7 * std::max(1.0, std::abs(ya[j]));
            VectorXd up = ya, dn = ya;
            up[j] += e;
            dn[j] -= e;
            column(j, (sys_.bc(up, yb, p) - sys_.bc(dn, yb, p)) / (2 * e));
        }
        for (int j = 0; j < n; ++j) {
            const double e = 1e-7 * std::max(1.0, std::abs(yb[j]));
            VectorXd up = yb, dn = yb;
            up[j] += e;
            dn[j] -= e;
            column(n * (N - 1) + j, (sys_.bc(ya, up, p) - sys_.bc(ya, dn, p)) / (2 * e));
        }
        for (int j = 0; j < np; ++j) {
            const double e = 1e-7 * std::max(1.0, std::abs(p[j]));
            VectorXd up = p, dn = p;
            up[j] += e;
            dn[j] -= e;
            column(n * N + j, (sys_.bc(ya, yb, up) - sys_.bc(ya, yb, dn)) / (2 * e));
        }
    }

    const CollocationSystem& sys_;
    const std::vector<double>& s_;
};

int newton(const Discretization& disc, VectorXd& z, const CollocationConfig& cfg, double& final_residual) {
    Eigen::SparseMatrix<double> J;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    for (int it = 1; it <= cfg.max_newton; ++it) {
        const VectorXd F = disc.residual(z, &J);
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw NewtonDiverged("collocation Jacobian is singular");
        const VectorXd dz = lu.solve(-F);
        if (!dz.allFinite()) throw NewtonDiverged("collocation Newton step is not finite");

        // Backtracking on the natural level function |J^-1 F| (the simplified
        // Newton correction), which tolerates ill-conditioned soft modes far
        // better than the plain residual norm.
        const double dz_norm = dz.norm();
        double lambda = 1.0;
        VectorXd z_try, F_try;
        while (true) {
            z_try = z + lambda * dz;
            F_try = disc.residual(z_try, nullptr);
            if (F_try.allFinite()) {
                if (F_try.lpNorm<Eigen::Infinity>() < cfg.residual_tol) break;
                const VectorXd dz_bar = lu.solve(-F_try);
                if (dz_bar.allFinite() && dz_bar.norm() <= (1.0 - lambda / 4.0) * dz_norm) break;
            }
            lambda *= 0.5;
            if (lambda < cfg.damping_floor) throw NewtonDiverged("damping floor reached in collocation Newton");
        }
        z = z_try;
        final_residual = F_try.lpNorm<Eigen::Infinity>();
        const double step = lambda * dz.lpNorm<Eigen::Infinity>() / (1.0 + z.lpNorm<Eigen::Infinity>());
        if (step < cfg.step_tol && final_residual < cfg.residual_tol) return it;
    }
    throw NewtonDiverged("collocation Newton did not converge in " + std::to_string(cfg.max_newton) + " iterations");
}

}  // namespace

CollocationResult solve_collocation(const CollocationSystem& sys, std::vector<double> nodes,
                                    std::vector<VectorXd> states, VectorXd p, const CollocationConfig& config) {
    if (nodes.size() < 2 || nodes.size() != states.size() || p.size() != sys.np)
        throw ContractViolation("collocation: inconsistent initial mesh");
    if (static_cast<int>(nodes.size()) > config.max_nodes) throw MeshBudget("collocation: initial mesh exceeds node cap");
    const int n = sys.n;
    CollocationResult out;

    for (int round = 0;; ++round) {
        const Discretization disc(sys, nodes);
        VectorXd z = disc.pack(states, p);
        double res = 0.0;
        out.newton_iters = std::max(out.newton_iters, newton(disc, z, config, res));
        disc.unpack(z, states, p);
        out.max_residual = res;

        const int N = static_cast<int>(nodes.size());
        std::vector<VectorXd> f(N), ypp(N);
        for (int i = 0; i < N; ++i) {
            MatrixXd J, Jp;
            f[i].resize(n);
            sys.rhs(nodes[i], states[i], p, f[i], &J, &Jp);
            ypp[i] = J * f[i];
        }
        const int n_mon = sys.n_monitor < 0 ? n : std::min(sys.n_monitor, n);
        std::vector<double> err(N - 1);
        double worst = 0.0;
        for (int i = 0; i + 1 < N; ++i) {
            const double h = nodes[i + 1] - nodes[i];
            const VectorXd cubic = 0.5 * (states[i] + states[i + 1]) + h / 8.0 * (f[i] - f[i + 1]);
            const VectorXd quintic = 0.5 * (states[i] + states[i + 1]) + 5.0 * h / 32.0 * (f[i] - f[i + 1]) +
                                     h * h / 64.0 * (ypp[i] + ypp[i + 1]);
            double e = 0.0;
            for (int c = 0; c < n_mon; ++c) {
                const double scale = 1.0 + std::max(std::abs(states[i][c]), std::abs(states[i + 1][c]));
                e = std::max(e, std::abs(quintic[c] - cubic[c]) / scale);
            }
            err[i] = e;
            worst = std::max(worst, e);
        }
        out.max_error_estimate = worst;
        out.remesh_rounds = round;
        double widest = 0.0;
        for (int i = 0; i + 1 < N; ++i) widest = std::max(widest, nodes[i + 1] - nodes[i]);
        if (worst <= config.mesh_tol && widest <= config.max_interval * (1.0 + 1e-12)) {
            out.nodes = std::move(nodes);
            out.states = std::move(states);
            out.slopes = std::move(f);
            out.p = p;
            return out;
        }
        if (round >= config.max_remesh) throw MeshBudget("collocation: mesh adaptation did not settle");

        std::vector<double> new_nodes{nodes[0]};
        const bool allow_merge = round < 4;
        const double merge_below = config.mesh_tol / 100.0;
        for (int i = 0; i + 1 < N; ++i) {
            if (allow_merge && i + 2 < N && err[i] < merge_below && err[i + 1] < merge_below &&
                nodes[i + 2] - nodes[i] <= config.max_interval) {
                new_nodes.push_back(nodes[i + 2]);
                ++i;
                continue;
            }
            const double width = nodes[i + 1] - nodes[i];
            if (err[i] > config.mesh_tol || width > config.max_interval) {
                int m = err[i] > config.mesh_tol
                            ? std::clamp(static_cast<int>(std::ceil(1.2 * std::pow(err[i] / config.mesh_tol, 0.25))), 2, 8)
                            : 1;
                m = std::max(m, static_cast<int>(std::ceil(width / config.max_interval)));
                for (int j = 1; j < m; ++j) new_nodes.push_back(nodes[i] + (nodes[i + 1] - nodes[i]) * j / m);
            }
            new_nodes.push_back(nodes[i + 1]);
        }
        if (static_cast<int>(new_nodes.size()) > config.max_nodes)
            throw MeshBudget("collocation: node cap of " + std::to_string(config.max_nodes) + " exceeded");

        std::vector<VectorXd> new_states;
        new_states.reserve(new_nodes.size());
        int seg = 0;
        for (double s : new_nodes) {
            while (seg + 2 < N && s > nodes[seg + 1]) ++seg;
            new_states.push_back(hermite_value(s, nodes[seg], nodes[seg + 1], states[seg], states[seg + 1], f[seg], f[seg + 1]));
        }
        nodes = std::move(new_nodes);
        states = std::move(new_states);
    }
}

}  // namespace heterokink::detail
