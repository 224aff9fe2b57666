#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "heterokink/analysis.hpp"
#include "heterokink/asymptotics.hpp"

using namespace heterokink;

namespace {

BranchTable synthetic(ModelKind kind, int k, const std::vector<double>& deltas, auto A_of, auto K_of) {
    BranchTable t(kind, k, Source::Bvp);
    for (double d : deltas) t.add({d, A_of(d), k, 0.0, {K_of(d)}});
    return t;
}

std::vector<double> logspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(std::pow(10.0, a + (b - a) * i / (n - 1)));
    return v;
}

}  // namespace

TEST_CASE("root distances of a tanh train") {
    std::vector<double> grid;
    for (int i = -300; i <= 300; ++i) grid.push_back(0.05 * i);
    const auto gaps = root_distances(tanh_profile(1, 3.0, grid));
    REQUIRE(gaps.size() == 2);
    // Tails of the neighbouring humps pull the outer zeros in slightly.
    CHECK(gaps[0] == doctest::Approx(3.0).epsilon(2e-3));
    CHECK(gaps[0] == doctest::Approx(gaps[1]).epsilon(1e-12));
    // Wider spacing: the shift decays like exp(-2K).
    const auto wide = root_distances(tanh_profile(1, 6.0, grid));
    CHECK(wide[0] == doctest::Approx(6.0).epsilon(1e-5));
}

TEST_CASE("single crossing is rejected") {
    std::vector<double> grid;
    for (int i = -100; i <= 100; ++i) grid.push_back(0.1 * i);
    CHECK_THROWS_AS(root_distances(tanh_profile(0, 1.0, grid)), FewerThanTwoCrossings);
}

TEST_CASE("root distances of a BVP profile and its reflection") {
    const auto s = solve_het(ModelKind::CCH, 1, 0.01);
    const MeshFunction full = reflect(s);
    const auto gaps = root_distances(full);
    REQUIRE(gaps.size() == 2);
    CHECK(gaps[0] == doctest::Approx(gaps[1]).epsilon(1e-9));
    // Mirror the profile: x -> -x, U -> R U.
    MeshFunction mirror;
    for (std::size_t i = full.x.size(); i-- > 0;) {
        mirror.x.push_back(-full.x[i]);
        mirror.U.push_back(reverse(PhaseVector(full.U[i])));
        mirror.dU.push_back(-reverse(PhaseVector(full.dU[i])));
    }
    const auto mg = root_distances(mirror);
    CHECK(mg[0] == doctest::Approx(gaps[1]).epsilon(1e-12));
    // Converged het_1 gap sits within O(delta) of the leading-order width.
    CHECK(std::abs(gaps[0] - cch_width_pred(0.01)) / cch_width_pred(0.01) < 0.05);
    // Midpoint jets feed the residual check.
    CHECK(profile_residual(ModelKind::CCH, s.params(), midpoint_jets(s.profile)) < 1e-4);
}

TEST_CASE("exact fits recover coefficients") {
    const auto d = logspace(-4, -1.5, 8);
    const auto lin = synthetic(ModelKind::CCH, 1, d, [](double x) { return 1 - 2.1213 * x; },
                               [](double x) { return -0.7071 * std::log(0.1768 * x); });
    const auto f = fit_linear_A(lin);
    CHECK(f.parameters[0] == doctest::Approx(2.1213).epsilon(1e-13));
    CHECK(f.rms_residual < 1e-15);
    CHECK(f.n_points == 8);
    const auto w = fit_log_width(lin);
    CHECK(w.parameters[0] == doctest::Approx(-0.7071).epsilon(1e-12));
    CHECK(w.parameters[1] == doctest::Approx(0.1768).epsilon(1e-10));
    const auto cube = synthetic(ModelKind::HCCH, 1, d, [](double x) { return 1 - 3.367 * std::cbrt(x); },
                                [](double) { return 1.0; });
    const auto c = fit_cube_root_A(cube);
    CHECK(c.parameters[0] == doctest::Approx(-3.367).epsilon(1e-13));
}

TEST_CASE("fit on the CCH law itself") {
    const auto d = logspace(-4, -2, 10);
    const auto t = synthetic(ModelKind::CCH, 2, d, [](double x) { return cch_A_pred(2, x); },
                             [](double) { return 1.0; });
    CHECK(fit_linear_A(t).parameters[0] == doctest::Approx(5.0 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("log fit is unweighted in ln delta and order independent") {
    const auto d = logspace(-5, -2, 9);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<BranchRow> rows;
    for (double x : d) rows.push_back({x, 1.0, 1, 0.0, {-0.7 * std::log(0.2 * x) + noise(rng)}});
    BranchTable a(ModelKind::CCH, 1, Source::Shoot), b(ModelKind::CCH, 1, Source::Shoot);
    for (const auto& r : rows) a.add(r);
    std::reverse(rows.begin(), rows.end());
    for (const auto& r : rows) b.add(r);
    CHECK(a == b);
    const auto fa = fit_log_width(a);
    // Independent normal equations in (ln delta, K).
    double su = 0, sK = 0, suu = 0, suK = 0;
    for (const auto& r : a.rows()) {
        const double u = std::log(r.delta);
        su += u;
        sK += r.gaps[0];
        suu += u * u;
        suK += u * r.gaps[0];
    }
    const double n = static_cast<double>(a.size());
    const double slope = (n * suK - su * sK) / (n * suu - su * su);
    CHECK(fa.parameters[0] == doctest::Approx(slope).epsilon(1e-12));
    // A weighted fit (weight 1/delta) differs: uniform weighting is a choice, not a no-op.
    double W = 0, Wu = 0, WK = 0, Wuu = 0, WuK = 0;
    for (const auto& r : a.rows()) {
        const double w = 1.0 / r.delta, u = std::log(r.delta);
        W += w;
        Wu += w * u;
        WK += w * r.gaps[0];
        Wuu += w * u * u;
        WuK += w * u * r.gaps[0];
    }
    const double wslope = (W * WuK - Wu * WK) / (W * Wuu - Wu * Wu);
    CHECK(std::abs(wslope - slope) > 1e-6);
}

TEST_CASE("fit preconditions") {
    BranchTable t(ModelKind::CCH, 1, Source::Shoot);
    t.add({0.01, 0.98, 1, 0.0, {4.0}});
    t.add({0.02, 0.96, 1, 0.0, {3.5}});
    CHECK_THROWS_AS(fit_linear_A(t), ContractViolation);
    t.add({0.03, 0.94, 1, 0.0, {3.1}});
    CHECK_NOTHROW(fit_linear_A(t));
    BranchTable flat(ModelKind::CCH, 1, Source::Shoot);
    for (double d : {0.01, 0.02, 0.03}) flat.add({d, 0.9, 1, 0.0, {2.0}});
    CHECK_THROWS_AS(fit_log_width(flat), DomainError);
    CHECK_THROWS_AS(t.add({0.04, 0.9, 2, 0.0, {}}), MismatchedFamilies);
}

TEST_CASE("branch table ordering and subset") {
    BranchTable t(ModelKind::CCH, 1, Source::Shoot);
    t.add({0.03, 0.9, 1, 0.0, {}});
    t.add({0.01, 0.97, 1, 0.0, {}});
    t.add({0.02, 0.95, 1, 0.0, {}});
    t.add({0.02, 0.951, 1, 0.0, {}});
    REQUIRE(t.size() == 3);
    CHECK(t.rows()[0].delta == 0.01);
    CHECK(t.rows()[1].A == 0.951);
    CHECK(t.subset(0.015, 0.05).size() == 2);
}

TEST_CASE("compare report") {
    const auto d = logspace(-4, -2, 5);
    const auto t = synthetic(ModelKind::CCH, 1, d, [](double x) { return cch_A_pred(1, x) - x * x; },
                             [](double x) { return cch_width_pred(x) + x; });
    std::vector<AsymptoticPrediction> preds;
    for (double x : d) preds.push_back(predict(ModelKind::CCH, 1, x));
    const auto rep = compare_report(t, preds);
    REQUIRE(rep.rows.size() == 5);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].width_abs_err > rep.rows[i - 1].width_abs_err);
    CHECK(rep.fits.size() == 2);
    // Byte-stable renderings.
    CHECK(rep.to_json().dump() == compare_report(t, preds).to_json().dump());
    CHECK(rep.to_text() == compare_report(t, preds).to_text());
    CHECK(rep.to_json()["kind"] == "cch");

    std::vector<AsymptoticPrediction> other = {predict(ModelKind::CCH, 1, 0.5)};
    CHECK_THROWS_AS(compare_report(t, other), MismatchedFamilies);
    std::vector<AsymptoticPrediction> wrong = {predict(ModelKind::HCCH, 1, d[0])};
    CHECK_THROWS_AS(compare_report(t, wrong), MismatchedFamilies);
}
