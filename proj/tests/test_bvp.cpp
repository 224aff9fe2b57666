#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "heterokink/asymptotics.hpp"
#include "heterokink/bvp.hpp"
#include "heterokink/errors.hpp"

using namespace heterokink;

namespace {

/// Exact delta = 0 antikink -tanh(x / sqrt 2) sampled on [x0, x1].
MeshFunction exact_kink(ModelKind kind, double x0, double x1, int n) {
    const int dim = dimension(kind);
    std::vector<double> grid;
    for (int i = 0; i <= n; ++i) grid.push_back(x0 + (x1 - x0) * i / n);
    const auto jets = tanh_profile(0, 1.0, grid, 1.0 / std::sqrt(2.0));
    MeshFunction m;
    for (const auto& j : jets) {
        m.x.push_back(j.x);
        Eigen::VectorXd u(dim), du(dim);
        for (int c = 0; c < dim; ++c) {
            u[c] = j.jet[c];
            du[c] = j.jet[c + 1];
        }
        m.U.push_back(u);
        m.dU.push_back(du);
    }
    return m;
}

}  // namespace

TEST_CASE("MeshFunction interpolates and clamps") {
    const auto m = exact_kink(ModelKind::CCH, -10.0, 0.0, 400);
    CHECK(m.value(-3.3)[0] == doctest::Approx(-std::tanh(-3.3 / std::sqrt(2.0))).epsilon(1e-8));
    CHECK((m.value(-50.0) - m.U.front()).norm() == 0.0);
    CHECK((m.value(5.0) - m.U.back()).norm() == 0.0);
}

TEST_CASE("delta = 0 kink is a fixed point of the half problem") {
    for (auto kind : {ModelKind::CCH, ModelKind::HCCH}) {
        const double L = 30.0;
        const auto guess = exact_kink(kind, -L, 0.0, 600);
        // At delta = 0 the HCCH far field has a triple zero eigenvalue; pin it instead of projecting.
        const auto bc = kind == ModelKind::CCH ? FarFieldBc::Projected : FarFieldBc::Pinned;
        const auto sol = solve(build_half_problem(kind, 0.0, L, 1.0, guess, bc));
        INFO(to_string(kind), " A-1=", sol.A - 1.0);
        CHECK(sol.newton_iters <= 3);
        // The fifth-order system carries an O(h^2) drift in A on this mesh.
        CHECK(sol.A == doctest::Approx(1.0).epsilon(kind == ModelKind::CCH ? 1e-8 : 1e-6));
        for (double x : {-7.0, -2.0, -0.5})
            CHECK(sol.profile.value(x)[0] == doctest::Approx(-std::tanh(x / std::sqrt(2.0))).epsilon(1e-7));
    }
}

TEST_CASE("pinned and projected far-field conditions agree") {
    const auto a = solve_het(ModelKind::CCH, 1, 0.05);
    const auto guess = a.profile;
    const auto b = solve(build_half_problem(ModelKind::CCH, 0.05, a.L, a.A, guess, FarFieldBc::Pinned));
    CHECK(b.A == doctest::Approx(a.A).epsilon(1e-8));
}

TEST_CASE("CCH het_1 at delta = 0.05") {
    const auto s = solve_het(ModelKind::CCH, 1, 0.05);
    CHECK(s.A == doctest::Approx(0.8967276).epsilon(1e-6));
    const auto full = reflect(s);
    const auto z = zero_crossings(full);
    REQUIRE(z.size() == 3);
    CHECK(std::abs(z[1]) < 1e-10);
    CHECK(z[0] == doctest::Approx(-z[2]).epsilon(1e-10));
    // Reflection symmetry c(x) = -c(-x).
    for (double x : {0.3, 1.7, 4.0, 9.0}) CHECK(full.value(x)[0] == doctest::Approx(-full.value(-x)[0]).epsilon(1e-8));
    CHECK(s.max_residual < 1e-8);
}

TEST_CASE("half and full formulations agree") {
    const auto half = solve_het(ModelKind::CCH, 1, 0.05);
    const auto full = solve(build_full_problem(ModelKind::CCH, 0.05, reflect(half), half.L, half.A + 0.005));
    CHECK(full.formulation == Formulation::FullProjected);
    CHECK(std::abs(full.A - half.A) < 1e-7);
    CHECK(std::abs(full.sigma) < 1e-8);
}

TEST_CASE("continuation in delta follows het_0") {
    const auto s = solve_het(ModelKind::CCH, 0, 0.05);
    CHECK(s.A == doctest::Approx(cch_A_pred(0, 0.05)).epsilon(1e-9));
    const auto path = continue_in_delta(s, {0.05, 0.04, 0.03});
    REQUIRE(path.size() == 3);
    for (const auto& p : path) CHECK(p.A == doctest::Approx(cch_A_pred(0, p.delta)).epsilon(1e-9));
}

TEST_CASE("initial guess and default length") {
    const double L = default_half_length(ModelKind::CCH, 2, 0.01, 0.97);
    CHECK(L > 12.0);
    const auto g = initial_guess(ModelKind::CCH, 2, 4.0, L);
    CHECK(g.x.front() == doctest::Approx(-L));
    CHECK(g.x.back() == 0.0);
    CHECK(g.U.front()[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(initial_guess(ModelKind::CCH, 2, 0.0, L), DomainError);
    CHECK(default_half_length(ModelKind::HCCH, 1, 1e-5, 0.9) > default_half_length(ModelKind::HCCH, 1, 1e-3, 0.9));
}

TEST_CASE("contract checks") {
    const auto g = initial_guess(ModelKind::CCH, 0, 1.0, 20.0);
    CHECK_THROWS_AS(build_half_problem(ModelKind::CCH, 0.01, -1.0, 1.0, g), ContractViolation);
    CHECK_THROWS_AS(build_half_problem(ModelKind::CCH, 0.01, 20.0, -1.0, g), ContractViolation);
    BvpConfig c;
    c.mesh_tol = 0.0;
    CHECK_THROWS_AS(c.validate(), ContractViolation);
}
