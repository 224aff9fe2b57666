#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "heterokink/errors.hpp"
#include "heterokink/systems.hpp"

using namespace heterokink;

namespace {

PhaseVector random_state(std::mt19937_64& rng, int dim) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    PhaseVector U(dim);
    for (int i = 0; i < dim; ++i) U[i] = u(rng);
    return U;
}

/// Exact delta = 0 antikink c = -tanh(x / sqrt 2) and its derivatives.
JetSample kink_jet(double x, int order) {
    const double a = 1.0 / std::sqrt(2.0);
    const double t = std::tanh(a * x);
    // d/dx of a polynomial in t is a (1 - t^2) P'(t); build P_n by coefficients.
    std::vector<double> P = {0.0, -1.0};
    JetSample s{x, {}};
    for (int n = 0; n <= order; ++n) {
        double v = 0.0;
        for (int i = static_cast<int>(P.size()) - 1; i >= 0; --i) v = v * t + P[i];
        s.jet.push_back(v);
        std::vector<double> dP(P.size() + 1, 0.0);
        for (std::size_t i = 1; i < P.size(); ++i) {
            dP[i - 1] += a * i * P[i];
            dP[i + 1] -= a * i * P[i];
        }
        P = dP;
    }
    return s;
}

}  // namespace

TEST_CASE("model kind parsing and dimension") {
    CHECK(dimension(ModelKind::CCH) == 3);
    CHECK(dimension(ModelKind::HCCH) == 5);
    CHECK(parse_model_kind("HCCH") == ModelKind::HCCH);
    CHECK(to_string(ModelKind::CCH) == "cch");
    CHECK_THROWS_AS(parse_model_kind("ch"), ContractViolation);
}

TEST_CASE("params validation") {
    CHECK_NOTHROW(ModelParams{1.0, 0.0}.validate());
    CHECK_THROWS_AS((ModelParams{0.0, 0.1}.validate()), ContractViolation);
    CHECK_THROWS_AS((ModelParams{1.0, -1e-3}.validate()), ContractViolation);
    CHECK_THROWS_AS((ModelParams{NAN, 0.0}.validate()), ContractViolation);
    CHECK_THROWS_AS(equilibrium_analysis(ModelKind::CCH, {-1.0, 0.0}, EquilibriumSign::Plus), ContractViolation);
}

TEST_CASE("rhs rejects a state of the wrong dimension") {
    PhaseVector U = PhaseVector::Zero(4);
    CHECK_THROWS_AS(rhs(ModelKind::CCH, {1.0, 0.0}, U), ContractViolation);
}

TEST_CASE("equilibria are fixed points") {
    for (auto kind : {ModelKind::CCH, ModelKind::HCCH})
        for (auto sign : {EquilibriumSign::Plus, EquilibriumSign::Minus}) {
            const ModelParams p{0.8, 0.03};
            const PhaseVector U0 = equilibrium_point(kind, sign);
            CHECK(rhs(kind, p, U0).norm() < 1e-14);
        }
}

TEST_CASE("reversibility R F(U) = -F(R U)") {
    std::mt19937_64 rng(7);
    for (auto kind : {ModelKind::CCH, ModelKind::HCCH}) {
        for (int i = 0; i < 1000; ++i) {
            const ModelParams p{0.3 + (i % 7) * 0.1, 0.01 * (i % 5)};
            const PhaseVector U = random_state(rng, dimension(kind));
            const PhaseVector lhs = reverse(rhs(kind, p, U));
            const PhaseVector rhs_ = -rhs(kind, p, reverse(U));
            REQUIRE((lhs - rhs_).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
}

TEST_CASE("analytic Jacobian and dF/dA match central differences") {
    std::mt19937_64 rng(11);
    for (auto kind : {ModelKind::CCH, ModelKind::HCCH}) {
        const ModelParams p{0.7, 0.04};
        const int n = dimension(kind);
        for (int trial = 0; trial < 20; ++trial) {
            const PhaseVector U = random_state(rng, n);
            const PhaseMatrix J = jacobian(kind, p, U);
            const double h = 1e-6;
            for (int j = 0; j < n; ++j) {
                PhaseVector up = U, um = U;
                up[j] += h;
                um[j] -= h;
                const PhaseVector col = (rhs(kind, p, up) - rhs(kind, p, um)) / (2 * h);
                CHECK((col - J.col(j)).cwiseAbs().maxCoeff() < 1e-7);
            }
            const PhaseVector dA = (rhs(kind, {p.A + h, p.delta}, U) - rhs(kind, {p.A - h, p.delta}, U)) / (2 * h);
            CHECK((dA - rhs_dA(kind, p, U)).cwiseAbs().maxCoeff() < 1e-7);
        }
    }
}

TEST_CASE("CCH kink linearisation: eigenvalues 0 and +-sqrt 2") {
    const auto info = equilibrium_analysis(ModelKind::CCH, {1.0, 0.0}, EquilibriumSign::Plus);
    REQUIRE(info.eigenvalues.size() == 3);
    CHECK(info.eigenvalues[0].real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::abs(info.eigenvalues[1]) < 1e-12);
    CHECK(info.eigenvalues[2].real() == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
    CHECK(info.n_center == 1);
}

TEST_CASE("HCCH at delta > 0 has a two-dimensional unstable manifold at U+") {
    const auto plus = equilibrium_analysis(ModelKind::HCCH, {1.0, 0.01}, EquilibriumSign::Plus);
    const auto minus = equilibrium_analysis(ModelKind::HCCH, {1.0, 0.01}, EquilibriumSign::Minus);
    CHECK(plus.n_unstable == 2);
    CHECK(minus.n_stable == 2);
    const auto cch = equilibrium_analysis(ModelKind::CCH, {0.9, 0.05}, EquilibriumSign::Plus);
    CHECK(cch.n_unstable == 1);
}

TEST_CASE("characteristic polynomial roots agree with Jacobian eigenvalues") {
    for (auto kind : {ModelKind::CCH, ModelKind::HCCH})
        for (auto sign : {EquilibriumSign::Plus, EquilibriumSign::Minus})
            for (double A : {0.4, 0.9, 1.3})
                for (double delta : {0.0, 1e-3, 0.05}) {
                    const ModelParams p{A, delta};
                    const auto info = equilibrium_analysis(kind, p, sign);
                    // Independent path: dense eigen-solver on the analytic Jacobian.
                    const Eigen::MatrixXd J = jacobian(kind, p, info.point);
                    Eigen::EigenSolver<Eigen::MatrixXd> es(J);
                    for (auto z : info.eigenvalues) {
                        CHECK(std::abs(eval_polynomial(info.char_poly, z)) < 1e-9);
                        double best = 1e300;
                        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
                            best = std::min(best, std::abs(es.eigenvalues()[i] - z));
                        CHECK(best < 1e-9);
                    }
                }
}

TEST_CASE("eigenvectors are normalised and satisfy J v = l v") {
    const ModelParams p{0.9, 0.02};
    const auto info = equilibrium_analysis(ModelKind::HCCH, p, EquilibriumSign::Plus);
    const Eigen::MatrixXcd J = jacobian(ModelKind::HCCH, p, info.point).cast<std::complex<double>>();
    for (std::size_t i = 0; i < info.eigenvalues.size(); ++i) {
        const auto& v = info.eigenvectors[i];
        CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((J * v - info.eigenvalues[i] * v).norm() < 1e-10);
        int first = 0;
        while (std::abs(v[first]) < 1e-14) ++first;
        CHECK(v[first].real() > 0.0);
        CHECK(std::abs(v[first].imag()) < 1e-12);
    }
}

TEST_CASE("unstable and stable bases are orthonormal and invariant") {
    for (auto kind : {ModelKind::CCH, ModelKind::HCCH}) {
        const ModelParams p{0.85, 0.01};
        const auto info = equilibrium_analysis(kind, p, EquilibriumSign::Plus);
        const Eigen::MatrixXd J = jacobian(kind, p, info.point);
        for (const Eigen::MatrixXd& B : {unstable_basis(info), stable_basis(info)}) {
            const Eigen::Index m = B.cols();
            CHECK((B.transpose() * B - Eigen::MatrixXd::Identity(m, m)).norm() < 1e-12);
            // Invariance: J B stays in span(B).
            const Eigen::MatrixXd JB = J * B;
            CHECK((JB - B * (B.transpose() * JB)).norm() < 1e-10);
        }
        CHECK(unstable_basis(info).cols() == info.n_unstable);
        CHECK(stable_basis(info).cols() == info.n_stable);
    }
}

TEST_CASE("exact delta = 0 kink has residual below 1e-12") {
    for (auto kind : {ModelKind::CCH, ModelKind::HCCH}) {
        std::vector<JetSample> prof;
        for (int i = -200; i <= 200; ++i) prof.push_back(kink_jet(0.05 * i, required_derivatives(kind)));
        CHECK(profile_residual(kind, {1.0, 0.0}, prof) < 1e-12);
        // A wrong amplitude is detected.
        CHECK(profile_residual(kind, {0.9, 0.0}, prof) > 1e-3);
    }
}

TEST_CASE("CCH tanh kink at delta = 0.05: residual delta/2 at the centre, zero in the far field") {
    const std::vector<JetSample> centre = {kink_jet(0.0, 3)};
    CHECK(profile_residual(ModelKind::CCH, {1.0, 0.05}, centre) == doctest::Approx(0.025).epsilon(1e-14));
    const std::vector<JetSample> far = {kink_jet(-30.0, 3), kink_jet(30.0, 3)};
    CHECK(profile_residual(ModelKind::CCH, {1.0, 0.05}, far) < 1e-15);
    std::vector<JetSample> prof;
    for (int i = -200; i <= 200; ++i) prof.push_back(kink_jet(0.05 * i, 3));
    CHECK(profile_residual(ModelKind::CCH, {1.0, 0.05}, prof) == doctest::Approx(0.025).epsilon(1e-14));
}

TEST_CASE("profile_residual checks jet length") {
    std::vector<JetSample> prof = {JetSample{0.0, {0.0, 1.0}}};
    CHECK_THROWS_AS(profile_residual(ModelKind::CCH, {1.0, 0.0}, prof), ContractViolation);
}

TEST_CASE("reverse and odd_norm") {
    PhaseVector U(5);
    U << 1, 2, 3, 4, 5;
    PhaseVector R(5);
    R << -1, 2, -3, 4, -5;
    CHECK((reverse(U) - R).norm() == 0.0);
    CHECK(odd_norm(U) == doctest::Approx(std::sqrt(35.0)));
}
