#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "heterokink/systems.hpp"

namespace heterokink {

/// Autonomous vector field U' = f(U).
using VectorField = std::function<PhaseVector(const PhaseVector&)>;

struct IntegratorConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;  ///< 0 selects a starting step automatically
    double h_max = 0.5;
    long max_steps = 1000000;
    double divergence_bound = 1e6;
    bool store_samples = true;

    void validate() const;
};

enum class EventKind { ComponentCrossesZero, AbsComponentExceeds, OddNormLocalMin };
enum class EventDirection { Any, Rising, Falling };

struct EventSpec {
    EventKind kind = EventKind::ComponentCrossesZero;
    int index = 0;  ///< 0-based component (unused for OddNormLocalMin)
    double threshold = 0.0;
    EventDirection direction = EventDirection::Any;
    bool terminal = false;
    /// Terminal after this many hits (0 = use `terminal` on the first hit).
    int stop_after = 0;

    static EventSpec crossing(int index, EventDirection dir = EventDirection::Any) {
        return {EventKind::ComponentCrossesZero, index, 0.0, dir, false, 0};
    }
    static EventSpec exceeds(int index, double threshold, bool terminal = true) {
        return {EventKind::AbsComponentExceeds, index, threshold, EventDirection::Rising, terminal, 0};
    }
    static EventSpec odd_norm_min() {
        return {EventKind::OddNormLocalMin, 0, 0.0, EventDirection::Rising, false, 0};
    }
};

struct TrajectorySample {
    double x;
    PhaseVector U;
};

struct EventHit {
    double x;
    PhaseVector U;
    int event_id;  ///< index into the event list passed to integrate()
};

enum class Termination { EventHit, SpanEnd, StepBudget, Diverged };

const char* to_string(Termination t);

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<EventHit> events;
    Termination termination = Termination::SpanEnd;
    double x_end = 0.0;
    PhaseVector U_end;
    long steps = 0;

    /// Hits of one event id, in order.
    std::vector<EventHit> hits(int event_id) const;
};

/// Adaptive Dormand-Prince 5(4) with quartic dense output. Events are located
/// by polishing the dense-output interpolant with Brent's method.
Trajectory integrate(const VectorField& field, const PhaseVector& U0, std::pair<double, double> x_span,
                     const IntegratorConfig& config, const std::vector<EventSpec>& events = {});

Trajectory integrate(const ModelSystem& system, const PhaseVector& U0, std::pair<double, double> x_span,
                     const IntegratorConfig& config, const std::vector<EventSpec>& events = {});

/// Fixed-step fifth-order propagation (no error control, no events).
PhaseVector integrate_fixed(const VectorField& field, const PhaseVector& U0,
                            std::pair<double, double> x_span, long n_steps);

/// Empirical order from fixed-step runs with n, 2n and 4n steps:
/// log2(|y_n - y_2n| / |y_2n - y_4n|).
double convergence_order(const VectorField& field, const PhaseVector& U0,
                         std::pair<double, double> x_span, long n_steps);

double convergence_order(const ModelSystem& system, const PhaseVector& U0,
                         std::pair<double, double> x_span, long n_steps);

}  // namespace heterokink
