#include "heterokink/shoot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "heterokink/detail/brent.hpp"
#include "heterokink/detail/nelder_mead.hpp"
#include "heterokink/detail/parallel.hpp"

namespace heterokink {

void ShootConfig::validate() const {
    if (!(eps_offset > 0.0) || !(threshold > 1.0) || !(x_max > 0.0))
        throw ContractViolation("shoot: eps_offset > 0, threshold > 1 and x_max > 0 required");
    if (!(a_min > 0.0) || !(a_max > a_min) || !(a_step > 0.0))
        throw ContractViolation("shoot: need 0 < a_min < a_max and a_step > 0");
    if (refine_factor < 1 || !(bisect_tol > 0.0) || !(accept_dmin > 0.0) || angle_samples < 1)
        throw ContractViolation("shoot: invalid refinement settings");
    integrator.validate();
}

namespace {

constexpr int kExceeds = 0;
constexpr int kCrossing = 1;
constexpr int kOddMin = 2;

ModelParams params_of(double A, double delta) {
    ModelParams p{A, delta};
    p.validate();
    return p;
}

std::vector<TrajectorySample> to_samples(const std::vector<EventHit>& hits) {
    std::vector<TrajectorySample> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back({h.x, h.U});
    return out;
}

Trajectory run_shot(ModelKind kind, const ModelParams& params, const ShootConfig& config,
                    int stop_after_crossings, bool store_samples) {
    const PhaseVector seed = unstable_seed(kind, params, config);
    IntegratorConfig ic = config.integrator;
    ic.store_samples = store_samples;
    std::vector<EventSpec> events{EventSpec::exceeds(0, config.threshold), EventSpec::crossing(0),
                                  EventSpec::odd_norm_min()};
    if (stop_after_crossings > 0) events[kCrossing].stop_after = stop_after_crossings;
    return integrate(ModelSystem{kind, params}, seed, {0.0, config.x_max}, ic, events);
}

BranchPoint make_point(ModelKind kind, int k, const ModelParams& params, double angle,
                       const std::vector<TrajectorySample>& crossings) {
    BranchPoint bp;
    bp.kind = kind;
    bp.k = k;
    bp.A = params.A;
    bp.delta = params.delta;
    bp.angle = angle;
    const auto& sym = crossings.at(static_cast<std::size_t>(k));
    bp.symmetric_x = sym.x;
    bp.symmetric_U = sym.U;
    bp.d_min = odd_norm(sym.U);
    for (int i = 0; i < k; ++i) bp.root_distances.push_back(crossings[i + 1].x - crossings[i].x);
    return bp;
}

/// Detector values at every crossing of a full shot.
struct GridSample {
    double A = 0.0;
    double d = 0.0;
    std::vector<double> detector;
};

GridSample sample_at(ModelKind kind, double A, double delta, const ShootConfig& config) {
    const ShotResult r = shoot(kind, params_of(A, delta), config);
    GridSample g{A, r.d_A, {}};
    for (const auto& c : r.crossings) g.detector.push_back(c.U[2]);
    return g;
}

}  // namespace

PhaseVector unstable_seed(ModelKind kind, const ModelParams& params, const ShootConfig& config) {
    const EquilibriumInfo info = equilibrium_analysis(kind, params, EquilibriumSign::Plus);
    const Eigen::MatrixXd basis = unstable_basis(info);
    if (basis.cols() == 0) throw NumericalFailure("U+ has no unstable direction");
    Eigen::VectorXd dir;
    if (kind == ModelKind::HCCH && basis.cols() >= 2) {
        dir = std::cos(config.angle) * basis.col(0) + std::sin(config.angle) * basis.col(1);
    } else {
        dir = basis.col(0);
        if (dir[0] > 0.0) dir = -dir;
    }
    return info.point + config.eps_offset * dir;
}

ShotResult shoot(ModelKind kind, const ModelParams& params, const ShootConfig& config,
                 int stop_after_crossings) {
    params.validate();
    config.validate();
    const Trajectory t = run_shot(kind, params, config, stop_after_crossings, false);
    ShotResult r;
    r.crossings = to_samples(t.hits(kCrossing));
    r.odd_minima = to_samples(t.hits(kOddMin));
    r.termination = t.termination;
    r.x_end = t.x_end;
    r.U_end = t.U_end;
    r.d_A = odd_norm(t.U_end);
    for (const auto& m : r.odd_minima) r.d_A = std::min(r.d_A, odd_norm(m.U));
    r.diverged_early = t.termination == Termination::Diverged && r.odd_minima.empty();
    return r;
}

DistanceValue distance_function(ModelKind kind, const ModelParams& params, const ShootConfig& config) {
    const ShotResult r = shoot(kind, params, config);
    return {r.d_A, r.diverged_early};
}

double signed_detector(ModelKind kind, const ModelParams& params, const ShootConfig& config,
                       int crossing_index) {
    if (crossing_index < 1) throw ContractViolation("crossing_index is 1-based");
    const ShotResult r = shoot(kind, params, config, crossing_index);
    if (static_cast<int>(r.crossings.size()) < crossing_index)
        throw NotEnoughCrossings("shot has " + std::to_string(r.crossings.size()) + " zero crossings, need " +
                                 std::to_string(crossing_index));
    return r.crossings[crossing_index - 1].U[2];
}

std::optional<BranchPoint> refine_root(ModelKind kind, double delta, int k, double a_lo, double a_hi,
                                       const ShootConfig& config) {
    if (k < 0) throw ContractViolation("k must be nonnegative");
    if (a_lo > a_hi) std::swap(a_lo, a_hi);
    const int j = k + 1;
    auto g = [&](double A) { return signed_detector(kind, params_of(A, delta), config, j); };
    double A_root = 0.0;
    try {
        const double f_lo = g(a_lo), f_hi = g(a_hi);
        if ((f_lo > 0.0) == (f_hi > 0.0) && f_lo != 0.0 && f_hi != 0.0) return std::nullopt;
        A_root = detail::brent(g, a_lo, a_hi, f_lo, f_hi, config.bisect_tol);
    } catch (const NotEnoughCrossings&) {
        return std::nullopt;
    }
    const ModelParams params = params_of(A_root, delta);
    const ShotResult r = shoot(kind, params, config, j);
    if (static_cast<int>(r.crossings.size()) < j) return std::nullopt;
    BranchPoint bp = make_point(kind, k, params, config.angle, r.crossings);
    if (!(bp.d_min < config.accept_dmin)) return std::nullopt;
    return bp;
}

ScanResult scan(ModelKind kind, double delta, const ShootConfig& config) {
    config.validate();
    params_of(config.a_min, delta);

    const int n = static_cast<int>(std::floor((config.a_max - config.a_min) / config.a_step + 1e-9)) + 1;
    std::vector<double> grid;
    for (int i = 0; i < n; ++i) grid.push_back(config.a_min + i * config.a_step);
    if (config.a_max - grid.back() > 1e-12) grid.push_back(config.a_max);

    std::vector<GridSample> samples(grid.size());
    detail::parallel_for(grid.size(), config.threads,
                         [&](std::size_t i) { samples[i] = sample_at(kind, grid[i], delta, config); });

    std::vector<double> extra;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        if (std::min(samples[i].d, samples[i + 1].d) >= config.refine_below) continue;
        const double h = (samples[i + 1].A - samples[i].A) / config.refine_factor;
        for (int m = 1; m < config.refine_factor; ++m) extra.push_back(samples[i].A + m * h);
    }
    if (!extra.empty()) {
        std::vector<GridSample> more(extra.size());
        detail::parallel_for(extra.size(), config.threads,
                             [&](std::size_t i) { more[i] = sample_at(kind, extra[i], delta, config); });
        samples.insert(samples.end(), more.begin(), more.end());
        std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.A < b.A; });
    }

    ScanResult out;
    for (const auto& s : samples) {
        out.profile.A_values.push_back(s.A);
        out.profile.d_values.push_back(s.d);
    }

    struct Bracket {
        int k;
        double lo, hi;
    };
    std::vector<Bracket> brackets;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const auto& a = samples[i];
        const auto& b = samples[i + 1];
        const std::size_t jmax = std::min(a.detector.size(), b.detector.size());
        for (std::size_t j = 0; j < jmax; ++j) {
            const double fa = a.detector[j], fb = b.detector[j];
            if (fa * fb < 0.0 || (fa == 0.0) != (fb == 0.0)) {
                brackets.push_back({static_cast<int>(j), a.A, b.A});
                out.profile.zero_candidates.emplace_back(a.A, b.A);
            }
        }
    }

    std::vector<std::optional<BranchPoint>> refined(brackets.size());
    detail::parallel_for(brackets.size(), config.threads, [&](std::size_t i) {
        refined[i] = refine_root(kind, delta, brackets[i].k, brackets[i].lo, brackets[i].hi, config);
    });

    for (auto& r : refined) {
        if (!r) continue;
        auto dup = std::find_if(out.points.begin(), out.points.end(), [&](const BranchPoint& p) {
            return p.k == r->k && std::abs(p.A - r->A) < 1e-8;
        });
        if (dup == out.points.end()) {
            out.points.push_back(*r);
        } else if (r->d_min < dup->d_min) {
            *dup = *r;
        }
    }
    std::sort(out.points.begin(), out.points.end(), [](const BranchPoint& a, const BranchPoint& b) {
        return a.A != b.A ? a.A > b.A : a.k < b.k;
    });
    return out;
}

std::vector<BranchPoint> scan_and_refine(ModelKind kind, double delta, const ShootConfig& config) {
    return scan(kind, delta, config).points;
}

std::optional<BranchPoint> refine_hcch(double delta, double A0, double angle0, const ShootConfig& config) {
    config.validate();
    auto objective = [&](const std::array<double, 2>& x) {
        if (!(x[0] > 0.0)) return 1e3;
        ShootConfig c = config;
        c.angle = x[1];
        try {
            return shoot(ModelKind::HCCH, params_of(x[0], delta), c).d_A;
        } catch (const NumericalFailure&) {
            return 1e3;
        }
    };
    const auto best = detail::nelder_mead2(objective, {A0, angle0}, {1e-3, 2.0 * std::numbers::pi / config.angle_samples},
                                           config.hcch_accept_dmin * 0.1, 1e-13, 4000, 4);
    if (!(best.f < config.hcch_accept_dmin)) return std::nullopt;

    ShootConfig c = config;
    c.angle = best.x[1];
    const ModelParams params = params_of(best.x[0], delta);
    const ShotResult r = shoot(ModelKind::HCCH, params, c);
    // The symmetric point is the odd-norm minimum reached before the orbit leaves.
    auto it = std::min_element(r.odd_minima.begin(), r.odd_minima.end(),
                               [](const auto& a, const auto& b) { return odd_norm(a.U) < odd_norm(b.U); });
    if (it == r.odd_minima.end()) return std::nullopt;
    std::vector<TrajectorySample> before;
    const double tol = 1e-4 * (1.0 + std::abs(it->x));
    for (const auto& z : r.crossings)
        if (z.x < it->x - tol) before.push_back(z);
    before.push_back(*it);
    const int k = static_cast<int>(before.size()) - 1;
    BranchPoint bp = make_point(ModelKind::HCCH, k, params, c.angle, before);
    bp.symmetric_x = it->x;
    bp.symmetric_U = it->U;
    bp.d_min = odd_norm(it->U);
    return bp;
}

namespace {

double asymptotic_slope(ModelKind kind, int k, double delta) {
    if (kind == ModelKind::CCH) return -(2 * k + 1) / std::numbers::sqrt2;
    const double c = (2 * k + 1) * std::pow(2.0, 1.0 / 6.0);
    return -c / 3.0 * std::pow(std::max(delta, 1e-300), -2.0 / 3.0);
}

std::optional<BranchPoint> search_window(ModelKind kind, int k, double delta, double A_pred, double width,
                                         const ShootConfig& config) {
    const double lo = std::max(A_pred - width, 1e-6);
    const double hi = A_pred + width;
    constexpr int m = 9;
    std::vector<std::optional<double>> g(m);
    std::vector<double> a(m);
    for (int i = 0; i < m; ++i) {
        a[i] = lo + (hi - lo) * i / (m - 1);
        try {
            g[i] = signed_detector(kind, params_of(a[i], delta), config, k + 1);
        } catch (const NotEnoughCrossings&) {
        }
    }
    // Try the bracket closest to the prediction first.
    std::vector<int> order;
    for (int i = 0; i + 1 < m; ++i)
        if (g[i] && g[i + 1] && (*g[i] * *g[i + 1] <= 0.0)) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](int p, int q) {
        return std::abs((a[p] + a[p + 1]) / 2 - A_pred) < std::abs((a[q] + a[q + 1]) / 2 - A_pred);
    });
    for (int i : order)
        if (auto r = refine_root(kind, delta, k, a[i], a[i + 1], config)) return r;
    return std::nullopt;
}

}  // namespace

std::vector<BranchPoint> trace_branch(ModelKind kind, int k, const BranchPoint& start,
                                      const std::vector<double>& delta_schedule, const ShootConfig& config) {
    config.validate();
    std::vector<BranchPoint> out{start};
    int failures = 0;
    for (double delta : delta_schedule) {
        if (delta == out.back().delta) continue;
        const BranchPoint& last = out.back();
        double slope = asymptotic_slope(kind, k, last.delta);
        if (out.size() >= 2) {
            const BranchPoint& prev = out[out.size() - 2];
            slope = (last.A - prev.A) / (last.delta - prev.delta);
        }
        const double step = delta - last.delta;
        const double A_pred = last.A + slope * step;
        const double change = std::abs(slope * step);

        std::optional<BranchPoint> next;
        if (kind == ModelKind::CCH) {
            // Tight window first: a wide grid can step over the root into the
            // region where the shot loses its crossings and leave no bracket.
            for (double factor : {0.5, 2.0, 10.0}) {
                next = search_window(kind, k, delta, A_pred, std::max(factor * change, 1e-6), config);
                if (next) break;
            }
        } else {
            next = refine_hcch(delta, A_pred, last.angle, config);
            if (next && next->k != k) next.reset();
        }
        if (!next) {
            if (++failures >= 2)
                throw BranchLost("lost het_" + std::to_string(k) + " near delta = " + std::to_string(delta), out);
            continue;
        }
        failures = 0;
        out.push_back(*next);
    }
    return out;
}

ReflectedTrajectory reconstruct(const BranchPoint& point, const ShootConfig& config) {
    ShootConfig c = config;
    c.angle = point.angle;
    const ModelParams params = params_of(point.A, point.delta);
    const Trajectory t = run_shot(point.kind, params, c, point.k + 1, true);
    std::vector<TrajectorySample> half;
    for (const auto& s : t.samples)
        if (s.x <= point.symmetric_x) half.push_back(s);
    if (half.empty()) throw NumericalFailure("reconstruct: empty trajectory");
    if (half.back().x < point.symmetric_x) half.push_back({point.symmetric_x, point.symmetric_U});

    ReflectedTrajectory out;
    const double xs = point.symmetric_x;
    out.samples.reserve(2 * half.size());
    for (const auto& s : half) out.samples.push_back({s.x - xs, s.U});
    for (auto it = half.rbegin() + 1; it != half.rend(); ++it) out.samples.push_back({xs - it->x, reverse(it->U)});
    return out;
}

}  // namespace heterokink
