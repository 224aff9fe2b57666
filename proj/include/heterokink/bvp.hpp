#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "heterokink/errors.hpp"
#include "heterokink/integrate.hpp"
#include "heterokink/systems.hpp"

namespace heterokink {

enum class Formulation {
    /// x in [-L, 0]: far-field condition at -L, symmetric section at 0, A free.
    HalfSymmetric,
    /// x in [-L, L]: projected conditions at both ends, integral phase
    /// condition, free A and a reversibility-breaking unfolding parameter.
    FullProjected,
};

/// Far-field condition of the half problem at x = -L.
enum class FarFieldBc {
    /// U(-L) - U+ lies in the unstable eigenspace of U+.
    Projected,
    /// U1 = 1, U2 = 0 (CCH) or U1 = 1, U2 = U3 = 0 (HCCH).
    Pinned,
};

std::string to_string(Formulation f);

/// Piecewise cubic Hermite state on a mesh of x values.
struct MeshFunction {
    std::vector<double> x;
    std::vector<Eigen::VectorXd> U;
    std::vector<Eigen::VectorXd> dU;  ///< dU/dx at the nodes

    bool empty() const { return x.empty(); }
    /// Hermite value; clamps to the end states outside [x.front(), x.back()].
    Eigen::VectorXd value(double xq) const;
    Eigen::VectorXd slope(double xq) const;
};

struct BvpProblem {
    ModelKind kind = ModelKind::CCH;
    Formulation formulation = Formulation::HalfSymmetric;
    FarFieldBc far_field = FarFieldBc::Projected;
    double delta = 0.0;
    double L = 20.0;  ///< half-length of the physical domain
    double A0 = 1.0;
    double sigma0 = 0.0;  ///< FullProjected only
    /// Initial guess of the phase-space state on the physical domain
    /// ([-L, 0] for HalfSymmetric, [-L, L] for FullProjected).
    MeshFunction guess;
    /// FullProjected: reference profile for the phase condition.
    MeshFunction reference;

    /// Unknown ODE count (dim, plus 1 phase integral for FullProjected).
    int n_ode() const;
    /// Free scalar count (A; plus sigma for FullProjected).
    int n_free() const;
    int n_bc() const { return n_ode() + n_free(); }
};

struct BvpConfig {
    double mesh_tol = 1e-9;
    double step_tol = 1e-10;
    double residual_tol = 1e-9;
    int max_newton = 100;
    int max_nodes = 10000;
    int max_remesh = 30;
    /// Widest mesh interval in x.
    double max_dx = 2.0;

    void validate() const;
};

struct BvpSolution {
    ModelKind kind = ModelKind::CCH;
    Formulation formulation = Formulation::HalfSymmetric;
    double delta = 0.0;
    double A = 0.0;
    double sigma = 0.0;
    double L = 0.0;
    MeshFunction profile;  ///< phase-space state on the physical domain
    int newton_iters = 0;
    int remesh_rounds = 0;
    double max_residual = 0.0;
    double max_error_estimate = 0.0;

    ModelParams params() const { return {A, delta}; }
};

/// Half-length guaranteeing tails below about 1e-10 at the truncation point:
/// 12 + (k + 3) * width plus 12 / (slowest unstable rate at U+).
double default_half_length(ModelKind kind, int k, double delta, double A);

/// k-hump tanh train with rate 1/sqrt(2) and spacing K sampled on [-L, 0]
/// (x = 0 is the symmetric point). Throws DomainError unless 0 < K < L/2 (k >= 1).
MeshFunction initial_guess(ModelKind kind, int k, double K, double L, int nodes = 0);

BvpProblem build_half_problem(ModelKind kind, double delta, double L, double A0, const MeshFunction& guess,
                              FarFieldBc far_field = FarFieldBc::Projected);

/// The reference profile doubles as the initial guess (pass a reflected half
/// solution or any full-domain profile).
BvpProblem build_full_problem(ModelKind kind, double delta, const MeshFunction& reference, double L, double A0);

BvpSolution solve(const BvpProblem& problem, const BvpConfig& config = {});

/// Full profile on [-L, L]: the half solution on [-L, 0] and reverse(U(-x)) on (0, L].
/// FullProjected solutions are returned unchanged.
MeshFunction reflect(const BvpSolution& solution);

/// Zero crossings of U1 in increasing x, polished on the Hermite interpolant.
std::vector<double> zero_crossings(const MeshFunction& profile);

/// Re-solves along the schedule, predicting (A, profile) by secant
/// extrapolation. Failed steps are halved up to max_halvings times, then
/// ContinuationStalled is thrown. When rescale_L is set, the domain follows
/// default_half_length. The first returned element is `start`.
struct ContinuationConfig {
    int max_halvings = 6;
    bool rescale_L = false;
    int k = 0;  ///< family index (only used for rescale_L)
};

std::vector<BvpSolution> continue_in_delta(const BvpSolution& start, const std::vector<double>& delta_schedule,
                                           const BvpConfig& config = {}, const ContinuationConfig& cont = {});

/// Half-symmetric het_k at delta from scratch: a tanh guess at a small start
/// delta where the asymptotic laws hold, then continuation up or down to delta.
BvpSolution solve_het(ModelKind kind, int k, double delta, const BvpConfig& config = {},
                      std::optional<double> L = std::nullopt);

}  // namespace heterokink
