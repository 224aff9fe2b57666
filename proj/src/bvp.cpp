#include "heterokink/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "heterokink/asymptotics.hpp"
#include "heterokink/detail/brent.hpp"
#include "heterokink/detail/collocation.hpp"

namespace heterokink {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(Formulation f) {
    return f == Formulation::HalfSymmetric ? "half_symmetric" : "full_projected";
}

namespace {

std::size_t interval_of(const std::vector<double>& x, double xq) {
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    return std::min(i, x.size() - 2);
}

}  // namespace

VectorXd MeshFunction::value(double xq) const {
    if (x.size() < 2) throw ContractViolation("MeshFunction needs at least two nodes");
    if (xq <= x.front()) return U.front();
    if (xq >= x.back()) return U.back();
    const std::size_t i = interval_of(x, xq);
    return detail::hermite_value(xq, x[i], x[i + 1], U[i], U[i + 1], dU[i], dU[i + 1]);
}

VectorXd MeshFunction::slope(double xq) const {
    if (x.size() < 2) throw ContractViolation("MeshFunction needs at least two nodes");
    if (xq <= x.front()) return dU.front();
    if (xq >= x.back()) return dU.back();
    const std::size_t i = interval_of(x, xq);
    return detail::hermite_slope(xq, x[i], x[i + 1], U[i], U[i + 1], dU[i], dU[i + 1]);
}

int BvpProblem::n_ode() const { return dimension(kind) + (formulation == Formulation::FullProjected ? 1 : 0); }
int BvpProblem::n_free() const { return formulation == Formulation::FullProjected ? 2 : 1; }

void BvpConfig::validate() const {
    if (!(mesh_tol > 0.0) || !(step_tol > 0.0) || !(residual_tol > 0.0))
        throw ContractViolation("bvp: tolerances must be positive");
    if (max_newton < 1 || max_nodes < 3 || max_remesh < 0) throw ContractViolation("bvp: invalid iteration limits");
}

double default_half_length(ModelKind kind, int k, double delta, double A) {
    double width = 0.0;
    if (k > 0 && delta > 0.0) {
        if (kind == ModelKind::HCCH) {
            width = hcch_width_pred(delta);
        } else {
            width = delta < 1.0 / kRho ? cch_width_pred(delta) : 4.0;
        }
        width = std::max(width, 2.0);
    }
    double L = 12.0 + (k + 3) * width;
    if (kind == ModelKind::HCCH && delta > 0.0 && A > 0.0) {
        const EquilibriumInfo info = equilibrium_analysis(kind, {A, delta}, EquilibriumSign::Plus);
        double slow = std::numeric_limits<double>::infinity();
        for (const auto& ev : info.eigenvalues)
            if (ev.real() > kCenterTolerance) slow = std::min(slow, ev.real());
        if (std::isfinite(slow)) L = std::max(L, 12.0 / slow);
    }
    return std::min(L, 5000.0);
}

MeshFunction initial_guess(ModelKind kind, int k, double K, double L, int nodes) {
    if (k < 0) throw DomainError("initial_guess: k must be nonnegative");
    if (!(L > 0.0)) throw DomainError("initial_guess: L must be positive");
    if (k > 0 && !(K > 0.0 && K < L / 2.0)) throw DomainError("initial_guess: need 0 < K < L/2");
    const int dim = dimension(kind);

    std::vector<double> x;
    if (nodes > 1) {
        for (int i = 0; i < nodes; ++i) x.push_back(-L + L * i / (nodes - 1));
    } else {
        // Fine spacing across the humps, geometric growth in the tail.
        const double core = std::min(L, k * K + 10.0);
        const double h = 0.1;
        for (double xi = 0.0; xi > -core; xi -= h) x.push_back(xi);
        double step = h, xi = -core;
        while (xi > -L) {
            x.push_back(xi);
            step = std::min(step * 1.05, 1.0);
            xi -= step;
        }
        x.push_back(-L);
        std::sort(x.begin(), x.end());
        x.erase(std::unique(x.begin(), x.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), x.end());
    }

    const auto jets = tanh_profile(k, K, x, 1.0 / std::numbers::sqrt2);
    MeshFunction g;
    g.x = x;
    for (const auto& j : jets) {
        VectorXd U(dim), dU(dim);
        for (int c = 0; c < dim; ++c) {
            U[c] = j.jet[c];
            dU[c] = j.jet[c + 1];
        }
        g.U.push_back(U);
        g.dU.push_back(dU);
    }
    return g;
}

BvpProblem build_half_problem(ModelKind kind, double delta, double L, double A0, const MeshFunction& guess,
                              FarFieldBc far_field) {
    ModelParams{A0, delta}.validate();
    if (!(L > 0.0)) throw ContractViolation("build_half_problem: L must be positive");
    BvpProblem p;
    p.kind = kind;
    p.formulation = Formulation::HalfSymmetric;
    p.far_field = far_field;
    p.delta = delta;
    p.L = L;
    p.A0 = A0;
    p.guess = guess;
    return p;
}

BvpProblem build_full_problem(ModelKind kind, double delta, const MeshFunction& reference, double L, double A0) {
    ModelParams{A0, delta}.validate();
    if (!(L > 0.0)) throw ContractViolation("build_full_problem: L must be positive");
    if (reference.x.size() < 2) throw ContractViolation("build_full_problem: empty reference profile");
    BvpProblem p;
    p.kind = kind;
    p.formulation = Formulation::FullProjected;
    p.delta = delta;
    p.L = L;
    p.A0 = A0;
    p.guess = reference;
    p.reference = reference;
    return p;
}

namespace {

/// Orthonormal basis of the orthogonal complement of span(E).
MatrixXd complement(const MatrixXd& E) {
    const int n = static_cast<int>(E.rows());
    if (E.cols() == 0) return MatrixXd::Identity(n, n);
    Eigen::HouseholderQR<MatrixXd> qr(E);
    const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, n);
    return Q.rightCols(n - E.cols());
}

/// Projection rows at one equilibrium, cached on A.
class FarFieldProjector {
public:
    FarFieldProjector(ModelKind kind, double delta, EquilibriumSign sign, bool unstable)
        : kind_(kind), delta_(delta), sign_(sign), unstable_(unstable) {}

    const MatrixXd& rows(double A) {
        if (A != cached_A_ || rows_.size() == 0) {
            const EquilibriumInfo info = equilibrium_analysis(kind_, {A, delta_}, sign_);
            rows_ = complement(unstable_ ? unstable_basis(info) : stable_basis(info)).transpose();
            cached_A_ = A;
        }
        return rows_;
    }

private:
    ModelKind kind_;
    double delta_;
    EquilibriumSign sign_;
    bool unstable_;
    double cached_A_ = std::numeric_limits<double>::quiet_NaN();
    MatrixXd rows_;
};

VectorXd nan_vector(int n) { return VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN()); }

detail::CollocationSystem half_system(const BvpProblem& prob) {
    const ModelKind kind = prob.kind;
    const int dim = dimension(kind);
    const double delta = prob.delta, L = prob.L;
    const FarFieldBc far = prob.far_field;
    auto proj = std::make_shared<FarFieldProjector>(kind, delta, EquilibriumSign::Plus, true);

    detail::CollocationSystem sys;
    sys.n = dim;
    sys.np = 1;
    sys.rhs = [=](double, const VectorXd& y, const VectorXd& p, VectorXd& f, MatrixXd* J, MatrixXd* Jp) {
        const ModelParams mp{p[0], delta};
        const PhaseVector U = y;
        f = L * rhs(kind, mp, U);
        if (J) *J = L * jacobian(kind, mp, U);
        if (Jp) *Jp = L * rhs_dA(kind, mp, U);
    };
    sys.bc = [=](const VectorXd& ya, const VectorXd& yb, const VectorXd& p) -> VectorXd {
        const int m = dim + 1;
        const int n_right = (dim + 1) / 2;
        VectorXd g(m);
        int r = 0;
        if (far == FarFieldBc::Pinned) {
            g[r++] = ya[0] - 1.0;
            for (int c = 1; c < m - n_right; ++c) g[r++] = ya[c];
        } else {
            if (!(p[0] > 0.0)) return nan_vector(m);
            const MatrixXd& P = proj->rows(p[0]);
            if (P.rows() != m - n_right)
                throw NumericalFailure("half problem: unstable dimension at U+ is " +
                                       std::to_string(dim - P.rows()) + ", expected " +
                                       std::to_string(dim + 1 - m + n_right));
            VectorXd dev = ya;
            dev[0] -= 1.0;
            g.head(P.rows()) = P * dev;
            r = static_cast<int>(P.rows());
        }
        for (int c = 0; c < dim; c += 2) g[r++] = yb[c];
        return g;
    };
    return sys;
}

detail::CollocationSystem full_system(const BvpProblem& prob) {
    const ModelKind kind = prob.kind;
    const int dim = dimension(kind);
    const double delta = prob.delta, L = prob.L;
    const MeshFunction ref = prob.reference;
    auto left = std::make_shared<FarFieldProjector>(kind, delta, EquilibriumSign::Plus, true);
    auto right = std::make_shared<FarFieldProjector>(kind, delta, EquilibriumSign::Minus, false);

    detail::CollocationSystem sys;
    sys.n = dim + 1;
    sys.np = 2;
    sys.n_monitor = dim;
    sys.rhs = [=](double s, const VectorXd& y, const VectorXd& p, VectorXd& f, MatrixXd* J, MatrixXd* Jp) {
        const ModelParams mp{p[0], delta};
        const double x = L * (2.0 * s - 1.0);
        const double scale = 2.0 * L;
        const PhaseVector U = y.head(dim);
        const VectorXd V = ref.value(x), Vx = ref.slope(x);
        f.resize(dim + 1);
        f.head(dim) = scale * rhs(kind, mp, U);
        f[dim - 1] += scale * p[1] * U[dim - 1];
        f[dim] = scale * Vx.dot(y.head(dim) - V);
        if (J) {
            J->setZero(dim + 1, dim + 1);
            J->topLeftCorner(dim, dim) = scale * jacobian(kind, mp, U);
            (*J)(dim - 1, dim - 1) += scale * p[1];
            J->row(dim).head(dim) = scale * Vx.transpose();
        }
        if (Jp) {
            Jp->setZero(dim + 1, 2);
            Jp->col(0).head(dim) = scale * rhs_dA(kind, mp, U);
            (*Jp)(dim - 1, 1) = scale * U[dim - 1];
        }
    };
    sys.bc = [=](const VectorXd& ya, const VectorXd& yb, const VectorXd& p) -> VectorXd {
        const int m = dim + 3;
        if (!(p[0] > 0.0)) return nan_vector(m);
        const MatrixXd& Pl = left->rows(p[0]);
        const MatrixXd& Pr = right->rows(p[0]);
        if (Pl.rows() + Pr.rows() + 2 != m)
            throw NumericalFailure("full problem: projected condition count " +
                                   std::to_string(Pl.rows() + Pr.rows()) + " does not close the system");
        VectorXd g(m);
        g[0] = ya[dim];
        g[1] = yb[dim];
        VectorXd dl = ya.head(dim), dr = yb.head(dim);
        dl[0] -= 1.0;
        dr[0] += 1.0;
        g.segment(2, Pl.rows()) = Pl * dl;
        g.tail(Pr.rows()) = Pr * dr;
        return g;
    };
    return sys;
}

}  // namespace

BvpSolution solve(const BvpProblem& problem, const BvpConfig& config) {
    config.validate();
    ModelParams{problem.A0, problem.delta}.validate();
    const bool full = problem.formulation == Formulation::FullProjected;
    const int dim = dimension(problem.kind);
    const MeshFunction& g = problem.guess;
    if (g.x.size() < 2 || g.U.size() != g.x.size()) throw ContractViolation("solve: initial guess is empty");
    if (g.U.front().size() != dim) throw ContractViolation("solve: guess dimension does not match the model");

    const double x0 = -problem.L, x1 = full ? problem.L : 0.0;
    auto s_of = [&](double x) { return (x - x0) / (x1 - x0); };

    std::vector<double> nodes;
    std::vector<VectorXd> states;
    auto add = [&](double x) {
        VectorXd y = VectorXd::Zero(full ? dim + 1 : dim);
        y.head(dim) = g.value(x);
        nodes.push_back(s_of(x));
        states.push_back(std::move(y));
    };
    add(x0);
    for (double x : g.x)
        if (x > x0 + 1e-12 && x < x1 - 1e-12) add(x);
    add(x1);

    const detail::CollocationSystem sys = full ? full_system(problem) : half_system(problem);
    VectorXd p(sys.np);
    p[0] = problem.A0;
    if (full) p[1] = problem.sigma0;

    detail::CollocationConfig cc;
    cc.mesh_tol = config.mesh_tol;
    cc.step_tol = config.step_tol;
    cc.residual_tol = config.residual_tol;
    cc.max_newton = config.max_newton;
    cc.max_nodes = config.max_nodes;
    cc.max_remesh = config.max_remesh;
    cc.max_interval = config.max_dx / (x1 - x0);
    const auto r = detail::solve_collocation(sys, std::move(nodes), std::move(states), p, cc);

    BvpSolution sol;
    sol.kind = problem.kind;
    sol.formulation = problem.formulation;
    sol.delta = problem.delta;
    sol.A = r.p[0];
    sol.sigma = full ? r.p[1] : 0.0;
    sol.L = problem.L;
    sol.newton_iters = r.newton_iters;
    sol.remesh_rounds = r.remesh_rounds;
    sol.max_residual = r.max_residual;
    sol.max_error_estimate = r.max_error_estimate;
    const double dxds = x1 - x0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        sol.profile.x.push_back(x0 + dxds * r.nodes[i]);
        sol.profile.U.push_back(r.states[i].head(dim));
        sol.profile.dU.push_back(r.slopes[i].head(dim) / dxds);
    }
    if (!(sol.A > 0.0)) throw NumericalFailure("solve: converged to nonpositive A");
    return sol;
}

MeshFunction reflect(const BvpSolution& solution) {
    if (solution.formulation == Formulation::FullProjected) return solution.profile;
    const MeshFunction& h = solution.profile;
    MeshFunction out = h;
    for (std::size_t i = h.x.size() - 1; i-- > 0;) {
        out.x.push_back(-h.x[i]);
        out.U.push_back(reverse(PhaseVector(h.U[i])));
        out.dU.push_back(-VectorXd(reverse(PhaseVector(h.dU[i]))));
    }
    return out;
}

std::vector<double> zero_crossings(const MeshFunction& profile) {
    std::vector<double> out;
    const auto& x = profile.x;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = profile.U[i][0], b = profile.U[i + 1][0];
        if (a == 0.0) {
            out.push_back(x[i]);
            continue;
        }
        if ((a > 0.0) == (b > 0.0) || b == 0.0) continue;
        auto f = [&](double xq) {
            return detail::hermite_value(xq, x[i], x[i + 1], profile.U[i], profile.U[i + 1], profile.dU[i],
                                         profile.dU[i + 1])[0];
        };
        out.push_back(detail::brent(f, x[i], x[i + 1], a, b, 1e-14));
    }
    if (!x.empty() && profile.U.back()[0] == 0.0) out.push_back(x.back());
    return out;
}

namespace {

/// Guess on [-L_new, x_end] from an existing profile; tails are clamped.
MeshFunction regrid(const MeshFunction& f, double L_new, double x_end) {
    MeshFunction g;
    auto push = [&](double x) {
        g.x.push_back(x);
        g.U.push_back(f.value(x));
        g.dU.push_back(x < f.x.front() ? VectorXd::Zero(f.U.front().size()) : f.slope(x));
    };
    push(-L_new);
    const double gap = f.x.size() > 1 ? f.x[1] - f.x[0] : 1.0;
    if (f.x.front() > -L_new) {
        const int extra = static_cast<int>(std::ceil((f.x.front() + L_new) / std::max(gap, 1.0)));
        for (int i = 1; i < extra; ++i) push(-L_new + (f.x.front() + L_new) * i / extra);
    }
    for (double x : f.x)
        if (x > -L_new + 1e-12 && x < x_end - 1e-12) push(x);
    push(x_end);
    return g;
}

MeshFunction extrapolate(const BvpSolution& a, const BvpSolution& b, double ratio) {
    MeshFunction g = b.profile;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        g.U[i] = b.profile.U[i] + ratio * (b.profile.U[i] - a.profile.value(g.x[i]));
        g.dU[i] = b.profile.dU[i] + ratio * (b.profile.dU[i] - a.profile.slope(g.x[i]));
    }
    return g;
}

BvpSolution resolve(const BvpSolution& like, double delta, double A0, const MeshFunction& guess, double L,
                    const BvpConfig& config) {
    BvpProblem p;
    if (like.formulation == Formulation::HalfSymmetric) {
        p = build_half_problem(like.kind, delta, L, A0, regrid(guess, L, 0.0));
    } else {
        p = build_full_problem(like.kind, delta, guess, L, A0);
        p.sigma0 = like.sigma;
    }
    return solve(p, config);
}

}  // namespace

std::vector<BvpSolution> continue_in_delta(const BvpSolution& start, const std::vector<double>& delta_schedule,
                                           const BvpConfig& config, const ContinuationConfig& cont) {
    std::vector<BvpSolution> out{start};
    for (double target : delta_schedule) {
        if (!(target >= 0.0)) throw ContractViolation("continue_in_delta: delta must be nonnegative");
        int halvings = 0;
        double step = target - out.back().delta;
        while (out.back().delta != target) {
            const BvpSolution& last = out.back();
            double next = last.delta + step;
            if ((step > 0.0 && next > target) || (step < 0.0 && next < target)) next = target;
            if (std::abs(next - target) <= 1e-9 * std::abs(step)) next = target;

            double A_pred = last.A;
            MeshFunction guess = last.profile;
            if (out.size() >= 2) {
                const BvpSolution& prev = out[out.size() - 2];
                const double ratio = (next - last.delta) / (last.delta - prev.delta);
                A_pred = last.A + ratio * (last.A - prev.A);
                if (!(A_pred > 0.0)) A_pred = last.A;
                guess = extrapolate(prev, last, ratio);
            }
            const double L = cont.rescale_L ? default_half_length(last.kind, cont.k, next, A_pred) : last.L;
            try {
                out.push_back(resolve(last, next, A_pred, guess, L, config));
                halvings = 0;
                step *= 1.5;
            } catch (const NumericalFailure&) {
                if (++halvings > cont.max_halvings)
                    throw ContinuationStalled("continuation stalled between delta = " + std::to_string(last.delta) +
                                              " and " + std::to_string(next));
                step = (next - last.delta) / 2.0;
            } catch (const ContractViolation&) {
                if (++halvings > cont.max_halvings)
                    throw ContinuationStalled("continuation left the parameter domain near delta = " +
                                              std::to_string(next));
                step = (next - last.delta) / 2.0;
            }
        }
    }
    return out;
}

BvpSolution solve_het(ModelKind kind, int k, double delta, const BvpConfig& config, std::optional<double> L) {
    if (k < 0 || !(delta >= 0.0)) throw DomainError("solve_het: need k >= 0 and delta >= 0");
    if (k > 0 && delta == 0.0) throw DomainError("solve_het: humped families do not exist at delta = 0");
    const double start = kind == ModelKind::CCH ? 0.02 : 1e-4;
    const AsymptoticPrediction pred = predict(kind, k, start);
    const double A0 = pred.A_pred;
    const double L0 = L ? *L : default_half_length(kind, k, start, A0);
    const double K = k > 0 ? pred.width_pred : 0.0;
    BvpSolution sol = solve(build_half_problem(kind, start, L0, A0, initial_guess(kind, k, K, L0)), config);

    const auto count = zero_crossings(reflect(sol)).size();
    if (static_cast<int>(count) != 2 * k + 1)
        throw NumericalFailure("solve_het: converged to a profile with " + std::to_string(count) +
                               " zero crossings, expected " + std::to_string(2 * k + 1));
    if (start == delta) return sol;

    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(std::log(delta / start)) / std::log(1.3))));
    std::vector<double> schedule;
    for (int i = 1; i <= steps; ++i) schedule.push_back(start * std::pow(delta / start, double(i) / steps));
    schedule.back() = delta;
    ContinuationConfig cc;
    cc.k = k;
    cc.rescale_L = !L.has_value();
    return continue_in_delta(sol, schedule, config, cc).back();
}

}  // namespace heterokink
