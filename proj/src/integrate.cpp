#include "heterokink/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "heterokink/detail/brent.hpp"
#include "heterokink/errors.hpp"

namespace heterokink {

namespace {

// Dormand-Prince 5(4) tableau with Hairer's continuous extension.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Stage {
    PhaseVector y_new, k7, err;
    PhaseVector k1, k3, k4, k5, k6;
};

Stage dp_step(const VectorField& f, const PhaseVector& y, const PhaseVector& k1, double h) {
    Stage s;
    s.k1 = k1;
    const PhaseVector k2 = f(y + h * a21 * k1);
    s.k3 = f(y + h * (a31 * k1 + a32 * k2));
    s.k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * s.k3));
    s.k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * s.k3 + a54 * s.k4));
    s.k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * s.k3 + a64 * s.k4 + a65 * s.k5));
    s.y_new = y + h * (a71 * k1 + a73 * s.k3 + a74 * s.k4 + a75 * s.k5 + a76 * s.k6);
    s.k7 = f(s.y_new);
    s.err = h * (e1 * k1 + e3 * s.k3 + e4 * s.k4 + e5 * s.k5 + e6 * s.k6 + e7 * s.k7);
    return s;
}

// Quartic interpolant over one accepted step.
struct DenseStep {
    double x0, h;
    PhaseVector r1, r2, r3, r4, r5;

    DenseStep(double x0_, double h_, const PhaseVector& y, const Stage& s) : x0(x0_), h(h_) {
        r1 = y;
        r2 = s.y_new - y;
        r3 = h * s.k1 - r2;
        r4 = r2 - h * s.k7 - r3;
        r5 = h * (d1 * s.k1 + d3 * s.k3 + d4 * s.k4 + d5 * s.k5 + d6 * s.k6 + d7 * s.k7);
    }

    PhaseVector at(double x) const {
        const double t = (x - x0) / h;
        const double t1 = 1.0 - t;
        return r1 + t * (r2 + t1 * (r3 + t * (r4 + t1 * r5)));
    }
};

double event_value(const EventSpec& ev, const VectorField& f, const PhaseVector& U) {
    switch (ev.kind) {
        case EventKind::ComponentCrossesZero:
            return U[ev.index];
        case EventKind::AbsComponentExceeds:
            return std::abs(U[ev.index]) - ev.threshold;
        case EventKind::OddNormLocalMin: {
            // d/dx of half the squared odd norm along the flow.
            const PhaseVector F = f(U);
            double g = 0.0;
            for (Eigen::Index i = 0; i < U.size(); i += 2) g += U[i] * F[i];
            return g;
        }
    }
    return 0.0;
}

bool direction_matches(EventDirection dir, double g0, double g1) {
    const bool rising = g0 < 0.0 && g1 >= 0.0;
    const bool falling = g0 > 0.0 && g1 <= 0.0;
    switch (dir) {
        case EventDirection::Any:
            return rising || falling;
        case EventDirection::Rising:
            return rising;
        case EventDirection::Falling:
            return falling;
    }
    return false;
}

double initial_step(const VectorField& f, const PhaseVector& y0, const PhaseVector& f0,
                    const IntegratorConfig& cfg, double span) {
    auto scaled_norm = [&](const PhaseVector& v, const PhaseVector& ref) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double sk = cfg.atol + cfg.rtol * std::abs(ref[i]);
            s += (v[i] / sk) * (v[i] / sk);
        }
        return std::sqrt(s / static_cast<double>(v.size()));
    };
    const double dnf = scaled_norm(f0, y0);
    const double dny = scaled_norm(y0, y0);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::min(h, cfg.h_max);
    const PhaseVector f1 = f(y0 + h * f0);
    const double der2 = scaled_norm(f1 - f0, y0) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, cfg.h_max, span});
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw ContractViolation("rtol and atol must be positive");
    if (!(h_max > 0.0)) throw ContractViolation("h_max must be positive");
    if (h_init < 0.0) throw ContractViolation("h_init must be non-negative");
    if (max_steps <= 0) throw ContractViolation("max_steps must be positive");
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::EventHit:
            return "event";
        case Termination::SpanEnd:
            return "span_end";
        case Termination::StepBudget:
            return "step_budget";
        case Termination::Diverged:
            return "diverged";
    }
    return "?";
}

std::vector<EventHit> Trajectory::hits(int event_id) const {
    std::vector<EventHit> out;
    for (const auto& e : events) {
        if (e.event_id == event_id) out.push_back(e);
    }
    return out;
}

Trajectory integrate(const VectorField& f, const PhaseVector& U0, std::pair<double, double> x_span,
                     const IntegratorConfig& cfg, const std::vector<EventSpec>& events) {
    cfg.validate();
    auto [x0, x1] = x_span;
    if (!(x0 < x1)) throw ContractViolation("integration span must satisfy x0 < x1");
    if (!U0.allFinite()) throw ContractViolation("initial state is not finite");
    for (const auto& ev : events) {
        if (ev.kind != EventKind::OddNormLocalMin && (ev.index < 0 || ev.index >= U0.size())) {
            throw ContractViolation("event component index out of range");
        }
        if (ev.kind == EventKind::AbsComponentExceeds && !(ev.threshold > 0.0)) {
            throw ContractViolation("event threshold must be positive");
        }
    }

    Trajectory traj;
    double x = x0;
    PhaseVector y = U0;
    PhaseVector k1 = f(y);
    if (cfg.store_samples) traj.samples.push_back({x, y});

    std::vector<int> hit_count(events.size(), 0);
    std::vector<double> g_prev(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) g_prev[i] = event_value(events[i], f, y);

    double h = cfg.h_init > 0.0 ? std::min(cfg.h_init, cfg.h_max) : initial_step(f, y, k1, cfg, x1 - x0);
    bool last_rejected = false;
    constexpr int kSubsamples = 4;

    while (true) {
        if (traj.steps >= cfg.max_steps) {
            traj.termination = Termination::StepBudget;
            break;
        }
        if (x + h > x1) h = x1 - x;
        if (h <= 1e-14 * std::max(1.0, std::abs(x))) {
            traj.termination = x >= x1 ? Termination::SpanEnd : Termination::StepBudget;
            break;
        }
        const Stage st = dp_step(f, y, k1, h);
        double err = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sk = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(st.y_new[i]));
            err += (st.err[i] / sk) * (st.err[i] / sk);
        }
        err = std::sqrt(err / static_cast<double>(y.size()));
        if (!std::isfinite(err)) {
            h *= 0.25;
            last_rejected = true;
            ++traj.steps;
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            last_rejected = true;
            ++traj.steps;
            continue;
        }

        ++traj.steps;
        const double x_new = x + h;
        const DenseStep dense(x, h, y, st);

        // Locate the earliest event inside (x, x_new].
        struct Found {
            double x;
            std::size_t id;
        };
        std::optional<Found> first_terminal;
        std::vector<Found> found;
        std::vector<double> g_end(events.size());
        for (std::size_t i = 0; i < events.size(); ++i) {
            const auto& ev = events[i];
            double ga = g_prev[i];
            double xa = x;
            for (int s = 1; s <= kSubsamples; ++s) {
                const double xb = s == kSubsamples ? x_new : x + h * s / kSubsamples;
                const PhaseVector Ub = s == kSubsamples ? st.y_new : dense.at(xb);
                const double gb = event_value(ev, f, Ub);
                if (direction_matches(ev.direction, ga, gb)) {
                    auto g = [&](double xx) { return event_value(ev, f, dense.at(xx)); };
                    const double xr = detail::brent(g, xa, xb, ga, gb, 1e-15 * std::max(1.0, std::abs(xb)));
                    found.push_back({xr, i});
                    ga = gb;
                    xa = xb;
                    continue;
                }
                ga = gb;
                xa = xb;
            }
            g_end[i] = ga;
        }
        std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
            return a.x != b.x ? a.x < b.x : a.id < b.id;
        });
        for (const auto& fd : found) {
            const auto& ev = events[fd.id];
            const PhaseVector Ue = dense.at(fd.x);
            traj.events.push_back({fd.x, Ue, static_cast<int>(fd.id)});
            ++hit_count[fd.id];
            const bool terminal = ev.stop_after > 0 ? hit_count[fd.id] >= ev.stop_after : ev.terminal;
            if (terminal) {
                first_terminal = fd;
                break;
            }
        }
        if (first_terminal) {
            const PhaseVector Ue = dense.at(first_terminal->x);
            if (cfg.store_samples) traj.samples.push_back({first_terminal->x, Ue});
            traj.termination = Termination::EventHit;
            x = first_terminal->x;
            y = Ue;
            break;
        }

        x = x_new;
        y = st.y_new;
        k1 = st.k7;
        g_prev = g_end;
        if (cfg.store_samples) traj.samples.push_back({x, y});

        if (y.cwiseAbs().maxCoeff() > cfg.divergence_bound || !y.allFinite()) {
            traj.termination = Termination::Diverged;
            break;
        }
        if (x >= x1) {
            traj.termination = Termination::SpanEnd;
            break;
        }

        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
        h = std::min(h * fac, cfg.h_max);
        last_rejected = false;
    }
    traj.x_end = x;
    traj.U_end = y;
    return traj;
}

Trajectory integrate(const ModelSystem& system, const PhaseVector& U0, std::pair<double, double> x_span,
                     const IntegratorConfig& config, const std::vector<EventSpec>& events) {
    if (U0.size() != system.dim()) throw ContractViolation("initial state has wrong dimension");
    const VectorField f = [system](const PhaseVector& U) { return system(U); };
    return integrate(f, U0, x_span, config, events);
}

PhaseVector integrate_fixed(const VectorField& f, const PhaseVector& U0, std::pair<double, double> x_span,
                            long n_steps) {
    if (n_steps <= 0) throw ContractViolation("n_steps must be positive");
    const double h = (x_span.second - x_span.first) / static_cast<double>(n_steps);
    PhaseVector y = U0;
    PhaseVector k1 = f(y);
    for (long i = 0; i < n_steps; ++i) {
        const Stage st = dp_step(f, y, k1, h);
        y = st.y_new;
        k1 = st.k7;
    }
    return y;
}

double convergence_order(const VectorField& f, const PhaseVector& U0, std::pair<double, double> x_span,
                         long n_steps) {
    const PhaseVector y1 = integrate_fixed(f, U0, x_span, n_steps);
    const PhaseVector y2 = integrate_fixed(f, U0, x_span, 2 * n_steps);
    const PhaseVector y4 = integrate_fixed(f, U0, x_span, 4 * n_steps);
    return std::log2((y1 - y2).norm() / (y2 - y4).norm());
}

double convergence_order(const ModelSystem& system, const PhaseVector& U0,
                         std::pair<double, double> x_span, long n_steps) {
    const VectorField f = [system](const PhaseVector& U) { return system(U); };
    return convergence_order(f, U0, x_span, n_steps);
}

}  // namespace heterokink
