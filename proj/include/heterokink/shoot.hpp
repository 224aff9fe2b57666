#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "heterokink/errors.hpp"
#include "heterokink/integrate.hpp"
#include "heterokink/systems.hpp"

namespace heterokink {

struct ShootConfig {
    double eps_offset = 1e-6;  ///< seed displacement along the unstable direction
    double threshold = 1.5;    ///< stop once |U1| exceeds this
    double a_min = 0.55;
    double a_max = 0.9999;
    double a_step = 1e-3;
    /// Grid intervals where d_A drops below this are subdivided refine_factor times.
    double refine_below = 0.05;
    int refine_factor = 10;
    double bisect_tol = 1e-12;
    double accept_dmin = 1e-8;
    double angle = 0.0;  ///< HCCH: position on the circle in the unstable plane
    double x_max = 400.0;
    unsigned threads = 0;  ///< 0 = hardware concurrency
    IntegratorConfig integrator{};

    // HCCH (A, angle) search.
    int angle_samples = 48;
    double hcch_accept_dmin = 1e-7;

    void validate() const;
};

/// What one shot from the unstable manifold of U+ recorded.
struct ShotResult {
    std::vector<TrajectorySample> crossings;  ///< zeros of U1, in order
    std::vector<TrajectorySample> odd_minima;  ///< local minima of the odd norm
    double d_A = 0.0;
    bool diverged_early = false;  ///< left through divergence before any local minimum
    Termination termination = Termination::SpanEnd;
    double x_end = 0.0;
    PhaseVector U_end;
};

/// Seed U+ + eps * direction. CCH: the unit unstable eigenvector oriented so
/// U1 decreases. HCCH: cos(angle) e1 + sin(angle) e2 on an orthonormal real
/// basis of the unstable plane. Throws NumericalFailure when U+ has no
/// unstable direction.
PhaseVector unstable_seed(ModelKind kind, const ModelParams& params, const ShootConfig& config);

/// Integrates from the seed until |U1| > threshold, x_max, or (when
/// stop_after_crossings > 0) the given number of U1 zero crossings.
ShotResult shoot(ModelKind kind, const ModelParams& params, const ShootConfig& config,
                 int stop_after_crossings = 0);

struct DistanceValue {
    double d = 0.0;
    bool diverged_early = false;
};

/// d_A = min over the trajectory of sqrt(sum of squared odd components).
DistanceValue distance_function(ModelKind kind, const ModelParams& params, const ShootConfig& config);

/// Odd part (U3, plus U5 for HCCH reported separately) at the crossing_index-th
/// (1-based) zero of U1. Throws NotEnoughCrossings if the shot has fewer.
double signed_detector(ModelKind kind, const ModelParams& params, const ShootConfig& config,
                       int crossing_index);

struct BranchPoint {
    ModelKind kind = ModelKind::CCH;
    int k = 0;
    double A = 0.0;
    double delta = 0.0;
    std::vector<double> root_distances;  ///< k gaps from the first zero up to the symmetric point
    double d_min = 0.0;
    double symmetric_x = 0.0;
    PhaseVector symmetric_U;
    double angle = 0.0;  ///< HCCH only
};

struct DistanceProfile {
    std::vector<double> A_values;
    std::vector<double> d_values;
    std::vector<std::pair<double, double>> zero_candidates;
};

struct ScanResult {
    DistanceProfile profile;
    std::vector<BranchPoint> points;  ///< ordered by decreasing A (increasing k)
};

/// Grid scan of the distance function plus detector bracketing and
/// refinement. Roots that fail the d_min confirmation are dropped.
ScanResult scan(ModelKind kind, double delta, const ShootConfig& config);

std::vector<BranchPoint> scan_and_refine(ModelKind kind, double delta, const ShootConfig& config);

/// Refines a single het_k root of the CCH detector inside [a_lo, a_hi].
/// Returns nullopt if the bracket is invalid or confirmation fails.
std::optional<BranchPoint> refine_root(ModelKind kind, double delta, int k, double a_lo, double a_hi,
                                       const ShootConfig& config);

/// HCCH: local derivative-free minimisation of d_A over (A, angle) from a
/// starting guess; accepted when d_A < hcch_accept_dmin.
std::optional<BranchPoint> refine_hcch(double delta, double A0, double angle0, const ShootConfig& config);

/// Thrown by trace_branch after two consecutive failed continuation steps.
class BranchLost : public NumericalFailure {
public:
    BranchLost(const std::string& what, std::vector<BranchPoint> partial)
        : NumericalFailure(what), partial_(std::move(partial)) {}
    const std::vector<BranchPoint>& partial() const noexcept { return partial_; }

private:
    std::vector<BranchPoint> partial_;
};

/// Follows the het_k root in delta. The first returned point is `start`.
std::vector<BranchPoint> trace_branch(ModelKind kind, int k, const BranchPoint& start,
                                      const std::vector<double>& delta_schedule,
                                      const ShootConfig& config);

/// Full profile reconstructed from a shot up to the symmetric point and its
/// reflection: samples on [x_sym - X, x_sym + X] shifted so the symmetric
/// point sits at x = 0.
struct ReflectedTrajectory {
    std::vector<TrajectorySample> samples;
};
ReflectedTrajectory reconstruct(const BranchPoint& point, const ShootConfig& config);

}  // namespace heterokink
