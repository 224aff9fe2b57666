// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion; `--criterion N`
// runs a single one and sets the exit status from it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "heterokink/analysis.hpp"
#include "heterokink/asymptotics.hpp"
#include "heterokink/bvp.hpp"
#include "heterokink/shoot.hpp"
#include "heterokink/systems.hpp"

using namespace heterokink;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    std::vector<std::string> notes;  ///< informational, never affect the verdict
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<double> logspace(double from, double to, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(std::exp(std::log(from) + (std::log(to) - std::log(from)) * i / (n - 1)));
    v.front() = from;
    v.back() = to;
    return v;
}

bool within_rel(double value, double target, double tol) { return std::abs(value - target) <= tol * std::abs(target); }

/// Shooting trace of CCH het_k over 10 log-spaced delta from 2e-2 down to 1e-4.
BranchTable cch_shoot_branch(int k) {
    ShootConfig cfg;
    const auto schedule = logspace(2e-2, 1e-4, 10);
    const double d0 = schedule.front();
    const double A0 = cch_A_pred(k, d0);
    std::optional<BranchPoint> start;
    for (double w : {2e-3, 5e-3, 1e-2}) {
        start = refine_root(ModelKind::CCH, d0, k, A0 - w, A0 + w, cfg);
        if (start && start->k == k) break;
        start.reset();
    }
    if (!start) throw NumericalFailure("no het_" + std::to_string(k) + " root near the predicted A");
    return BranchTable::from_points(trace_branch(ModelKind::CCH, k, *start, schedule, cfg));
}

// ---------------------------------------------------------------------------

Outcome criterion_1_2(bool width) {
    const BranchTable t = cch_shoot_branch(1);
    Outcome o;
    if (!width) {
        const FitResult f = fit_linear_A(t);
        const double target = 3.0 / std::sqrt(2.0);
        o.pass = t.size() == 10 && within_rel(f.parameters[0], target, 0.05);
        o.detail = fmt("mu1 = %.5f vs %.5f (%zu points, rel dev %.2f%%)", f.parameters[0], target, t.size(),
                       100 * std::abs(f.parameters[0] / target - 1));
    } else {
        const FitResult f = fit_log_width(t);
        const double e1 = -1.0 / std::sqrt(2.0), e2 = 1.0 / (4.0 * std::sqrt(2.0));
        o.pass = within_rel(f.parameters[0], e1, 0.05) && within_rel(f.parameters[1], e2, 0.10);
        o.detail = fmt("eta1 = %.5f vs %.5f, eta2 = %.5f vs %.5f", f.parameters[0], e1, f.parameters[1], e2);
        const FitResult g = fit_log_width(t.subset(0.0, 2e-3));
        o.notes.push_back(fmt("delta <= 2e-3 only (%d points): eta1 = %.5f, eta2 = %.5f", g.n_points, g.parameters[0],
                              g.parameters[1]));
    }
    return o;
}

Outcome criterion_3() {
    Outcome o;
    o.pass = true;
    for (int k : {0, 2, 3}) {
        const BranchTable t = cch_shoot_branch(k);
        const double mu = fit_linear_A(t).parameters[0];
        const double target = (2 * k + 1) / std::sqrt(2.0);
        const bool ok = t.size() == 10 && within_rel(mu, target, 0.05);
        o.pass = o.pass && ok;
        o.detail += fmt("k=%d: mu1 = %.4f vs %.4f%s  ", k, mu, target, ok ? "" : " (off)");
    }
    return o;
}

Outcome criterion_4() {
    Outcome o;
    o.pass = true;
    const std::pair<double, double> golden[] = {{0.0289, 0.8259}, {0.0017, 0.9893}};
    for (auto [delta, A_ref] : golden) {
        const auto pts = scan_and_refine(ModelKind::CCH, delta, ShootConfig{});
        double best = NAN;
        for (const auto& p : pts)
            if (p.k == 4 && (std::isnan(best) || std::abs(p.A - A_ref) < std::abs(best - A_ref))) best = p.A;
        const bool ok = !std::isnan(best) && std::abs(best - A_ref) < 5e-3;
        o.pass = o.pass && ok;
        o.detail += fmt("delta=%g: het_4 A = %.6f vs %.4f  ", delta, best, A_ref);
    }
    return o;
}

Outcome criterion_5() {
    Outcome o;
    auto count = [](const ShootConfig& cfg) {
        int n = 0;
        double lowest = NAN;
        for (const auto& p : scan_and_refine(ModelKind::CCH, 0.05, cfg))
            if (p.d_min < 1e-8) {
                ++n;
                lowest = p.A;
            }
        return std::pair{n, lowest};
    };
    ShootConfig cfg;
    cfg.a_min = 0.55;
    cfg.a_max = 0.9999;
    const auto [n, lowest] = count(cfg);
    o.pass = n >= 14;
    o.detail = fmt("%d zeros with d_min < 1e-8 in A in [0.55, 0.9999], lowest at A = %.6f (need 14)", n, lowest);
    ShootConfig wide = cfg;
    wide.a_min = 0.38;
    const auto [nw, lw] = count(wide);
    o.notes.push_back(fmt("widened window A in [0.38, 0.9999]: %d zeros, lowest at A = %.6f", nw, lw));
    return o;
}

Outcome criterion_6() {
    Outcome o;
    const BvpSolution s = solve_het(ModelKind::HCCH, 2, 0.01);
    const int crossings = static_cast<int>(zero_crossings(reflect(s)).size());
    o.pass = std::abs(s.A - 0.443) < 5e-3;
    o.detail = fmt("A = %.6f vs 0.443 (converged, residual %.1e)", s.A, s.max_residual);
    o.notes.push_back(fmt("sqrt(A) = %.6f, |sqrt(A) - 0.443| = %.1e; profile has %d zero crossing(s)",
                          std::sqrt(s.A), std::abs(std::sqrt(s.A) - 0.443), crossings));
    return o;
}

/// HCCH het_k by BVP continuation from the auto-guess start down to 1e-5.
std::vector<BvpSolution> hcch_branch(int k, const std::vector<double>& schedule) {
    ContinuationConfig cont;
    cont.k = k;
    cont.rescale_L = true;
    const BvpSolution first = solve_het(ModelKind::HCCH, k, schedule.front());
    return continue_in_delta(first, schedule, BvpConfig{}, cont);
}

Outcome criterion_7() {
    Outcome o;
    o.pass = true;
    const auto schedule = logspace(1e-4, 1e-5, 6);
    const double c = std::pow(2.0, 1.0 / 6.0);
    for (int k : {0, 1, 2}) {
        const auto sols = hcch_branch(k, schedule);
        const FitResult f = fit_cube_root_A(BranchTable::from_solutions(sols, k));
        const double target = -(2 * k + 1) * c;
        bool reached = true;
        for (double d : schedule)
            reached = reached && std::any_of(sols.begin(), sols.end(),
                                             [&](const BvpSolution& s) { return std::abs(s.delta - d) <= 1e-12 * d; });
        const bool ok = reached && within_rel(f.parameters[0], target, 0.05);
        o.pass = o.pass && ok;
        o.detail += fmt("k=%d: A1 = %.4f vs %.4f (%zu solves)%s  ", k, f.parameters[0], target, sols.size(),
                        reached ? "" : " missed a scheduled delta");
    }
    return o;
}

Outcome criterion_8() {
    Outcome o;
    const std::vector<double> deltas = {1e-3, 1e-4, 1e-5};
    const auto sols = hcch_branch(1, logspace(1e-3, 1e-5, 7));
    std::vector<double> err;
    for (double d : deltas) {
        const BvpSolution* s = nullptr;
        for (const auto& x : sols)
            if (std::abs(x.delta - d) <= 1e-12 * d) s = &x;
        if (!s) throw NumericalFailure("continuation skipped a target delta");
        const double gap = root_distances(reflect(*s)).front();
        const double pred = hcch_width_pred(d);
        err.push_back(std::abs(gap - pred));
        o.detail += fmt("delta=%g: gap %.4f vs %.4f  ", d, gap, pred);
    }
    const double rel = err.back() / hcch_width_pred(deltas.back());
    o.pass = err[0] > err[1] && err[1] > err[2] && rel < 0.15;
    o.detail += fmt("rel err at 1e-5: %.2f%%", 100 * rel);
    return o;
}

Outcome criterion_9() {
    Outcome o;
    std::vector<std::string> failed;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) failed.push_back(what);
    };

    // Reversibility.
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-2.0, 2.0), ua(0.2, 1.5), ud(0.0, 0.1);
    double rev = 0.0;
    for (auto kind : {ModelKind::CCH, ModelKind::HCCH})
        for (int i = 0; i < 1000; ++i) {
            const ModelParams p{ua(rng), ud(rng)};
            PhaseVector U(dimension(kind));
            for (Eigen::Index j = 0; j < U.size(); ++j) U[j] = u(rng);
            rev = std::max(rev, (reverse(rhs(kind, p, U)) + rhs(kind, p, reverse(U))).cwiseAbs().maxCoeff());
        }
    check(rev < 1e-13, fmt("reversibility %.1e", rev));

    // Characteristic polynomial against the Jacobian spectrum.
    double eig = 0.0;
    for (auto kind : {ModelKind::CCH, ModelKind::HCCH})
        for (auto sign : {EquilibriumSign::Plus, EquilibriumSign::Minus})
            for (double A : {0.5, 0.9, 1.0})
                for (double d : {0.0, 1e-4, 0.03}) {
                    const auto info = equilibrium_analysis(kind, {A, d}, sign);
                    Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(jacobian(kind, {A, d}, info.point)));
                    for (auto z : info.eigenvalues) {
                        double best = 1e300;
                        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
                            best = std::min(best, std::abs(es.eigenvalues()[i] - z));
                        eig = std::max({eig, best, std::abs(eval_polynomial(info.char_poly, z))});
                    }
                }
    check(eig < 1e-9, fmt("char-poly/Jacobian %.1e", eig));

    // Exact delta = 0 kink: residual and BVP fixed point.
    const double r2 = 1.0 / std::sqrt(2.0);
    std::vector<double> grid;
    for (int i = -400; i <= 400; ++i) grid.push_back(0.05 * i);
    const auto jets = tanh_profile(0, 1.0, grid, r2);
    double kink = 0.0;
    int newton = 0;
    for (auto kind : {ModelKind::CCH, ModelKind::HCCH}) {
        kink = std::max(kink, profile_residual(kind, {1.0, 0.0}, jets));
        MeshFunction g;
        for (const auto& j : jets) {
            if (j.x > 0.0) break;
            g.x.push_back(j.x);
            Eigen::VectorXd v(dimension(kind)), dv(dimension(kind));
            for (int c = 0; c < dimension(kind); ++c) {
                v[c] = j.jet[c];
                dv[c] = j.jet[c + 1];
            }
            g.U.push_back(v);
            g.dU.push_back(dv);
        }
        const auto bc = kind == ModelKind::CCH ? FarFieldBc::Projected : FarFieldBc::Pinned;
        const auto s = solve(build_half_problem(kind, 0.0, 20.0, 1.0, g, bc));
        newton = std::max(newton, s.newton_iters);
    }
    check(kink < 1e-12, fmt("kink residual %.1e", kink));
    check(newton <= 3, fmt("fixed point took %d Newton iterations", newton));

    // Lambert identity.
    double lam = 0.0;
    for (double x = -0.36; x < 1e12; x = x < 0 ? x + 0.04 : (x == 0 ? 1e-6 : x * 3.0)) {
        const double w = lambert_w(x);
        if (x != 0.0) lam = std::max(lam, std::abs(w * std::exp(w) - x) / std::abs(x));
    }
    check(lam < 1e-13, fmt("Lambert identity %.1e", lam));

    // Half/full agreement, reflection symmetry and L-doubling on two families.
    double hf = 0.0, refl = 0.0, dbl = 0.0;
    for (auto [kind, delta] : {std::pair{ModelKind::CCH, 0.05}, std::pair{ModelKind::HCCH, 1e-3}}) {
        const BvpSolution half = solve_het(kind, 1, delta);
        const MeshFunction full_profile = reflect(half);
        const BvpSolution full = solve(build_full_problem(kind, delta, full_profile, half.L, half.A));
        hf = std::max(hf, std::abs(full.A - half.A));
        for (double x = 0.0; x <= half.L; x += 0.37)
            refl = std::max(refl, std::abs(full_profile.value(x)[0] + full_profile.value(-x)[0]));
        const BvpSolution twice = solve_het(kind, 1, delta, BvpConfig{}, 2.0 * half.L);
        dbl = std::max(dbl, std::abs(twice.A - half.A));
    }
    check(hf < 1e-7, fmt("half/full %.1e", hf));
    check(refl < 1e-8, fmt("reflection %.1e", refl));
    check(dbl < 1e-8, fmt("L doubling %.1e", dbl));

    o.pass = failed.empty();
    o.detail = fmt("rev %.1e, eig %.1e, kink %.1e, newton %d, lambert %.1e, half/full %.1e, refl %.1e, 2L %.1e", rev,
                   eig, kink, newton, lam, hf, refl, dbl);
    for (const auto& f : failed) o.notes.push_back("failed: " + f);
    return o;
}

Outcome criterion_10() {
    Outcome o;
    const auto shot = refine_root(ModelKind::CCH, 0.05, 1, 0.89, 0.90, ShootConfig{});
    if (!shot) throw NumericalFailure("shooting lost het_1");
    const BvpSolution bvp = solve_het(ModelKind::CCH, 1, 0.05);
    o.pass = std::abs(shot->A - bvp.A) < 1e-6;
    o.detail = fmt("shoot %.10f, bvp %.10f, diff %.1e", shot->A, bvp.A, std::abs(shot->A - bvp.A));
    return o;
}

const char* title(int n) {
    static const char* names[] = {"",
                                  "CCH het_1 A-law",
                                  "CCH het_1 width law",
                                  "CCH het_k slopes",
                                  "CCH het_4 golden points",
                                  "distance-function zeros at delta = 0.05",
                                  "HCCH het_2 golden point",
                                  "HCCH A-law family",
                                  "HCCH Lambert-W width",
                                  "property suite",
                                  "shooting vs BVP"};
    return names[n];
}

Outcome run(int n) {
    switch (n) {
        case 1: return criterion_1_2(false);
        case 2: return criterion_1_2(true);
        case 3: return criterion_3();
        case 4: return criterion_4();
        case 5: return criterion_5();
        case 6: return criterion_6();
        case 7: return criterion_7();
        case 8: return criterion_8();
        case 9: return criterion_9();
        case 10: return criterion_10();
    }
    throw ContractViolation("criterion must be 1..10");
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            which.push_back(std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
            return 2;
        }
    }
    if (which.empty())
        for (int n = 1; n <= 10; ++n) which.push_back(n);

    int failures = 0;
    for (int n : which) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run(n);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d %s  %s: %s  [%.1f s]\n", n, o.pass ? "PASS" : "FAIL", title(n), o.detail.c_str(),
                    secs);
        for (const auto& note : o.notes) std::printf("             note: %s\n", note.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
