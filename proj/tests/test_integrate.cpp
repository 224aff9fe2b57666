#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "heterokink/errors.hpp"
#include "heterokink/integrate.hpp"

using namespace heterokink;

namespace {

PhaseVector vec(std::initializer_list<double> v) {
    PhaseVector U(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) U[i++] = x;
    return U;
}

// y'' = -y as a first-order system.
PhaseVector oscillator(const PhaseVector& U) { return vec({U[1], -U[0]}); }

}  // namespace

TEST_CASE("exponential growth to tolerance") {
    IntegratorConfig cfg;
    auto t = integrate([](const PhaseVector& U) { return PhaseVector(U); }, vec({1.0}), {0.0, 2.0}, cfg);
    CHECK(t.termination == Termination::SpanEnd);
    CHECK(t.U_end[0] == doctest::Approx(std::exp(2.0)).epsilon(1e-9));
    CHECK(t.x_end == 2.0);
}

TEST_CASE("zero-crossing events are located on the dense output") {
    IntegratorConfig cfg;
    std::vector<EventSpec> ev = {EventSpec::crossing(0), EventSpec::crossing(0, EventDirection::Falling)};
    auto t = integrate(oscillator, vec({0.0, 1.0}), {0.0, 10.0}, cfg, ev);
    const auto any = t.hits(0);
    REQUIRE(any.size() == 3);  // pi, 2 pi, 3 pi
    for (std::size_t i = 0; i < any.size(); ++i)
        CHECK(any[i].x == doctest::Approx(std::numbers::pi * (i + 1)).epsilon(1e-10));
    const auto falling = t.hits(1);
    REQUIRE(falling.size() == 2);  // pi and 3 pi
    CHECK(falling[0].x == doctest::Approx(std::numbers::pi).epsilon(1e-10));
}

TEST_CASE("terminal events stop the integration") {
    IntegratorConfig cfg;
    auto crossing = EventSpec::crossing(0);
    crossing.stop_after = 2;
    auto t = integrate(oscillator, vec({0.0, 1.0}), {0.0, 100.0}, cfg, {crossing});
    CHECK(t.termination == Termination::EventHit);
    CHECK(t.x_end == doctest::Approx(2 * std::numbers::pi).epsilon(1e-10));

    auto t2 = integrate([](const PhaseVector& U) { return PhaseVector(U); }, vec({1.0}), {0.0, 10.0}, cfg,
                        {EventSpec::exceeds(0, 5.0)});
    CHECK(t2.x_end == doctest::Approx(std::log(5.0)).epsilon(1e-10));
}

TEST_CASE("odd-norm local minima") {
    // U = (cos x, -sin x, cos x): odd norm sqrt(2)|cos x|, minima at pi/2 + n pi.
    IntegratorConfig cfg;
    auto f = [](const PhaseVector& U) { return vec({U[1], -U[0], U[1]}); };
    auto t = integrate(f, vec({1.0, 0.0, 1.0}), {0.0, 5.0}, cfg, {EventSpec::odd_norm_min()});
    const auto h = t.hits(0);
    REQUIRE(h.size() >= 1);
    CHECK(h[0].x == doctest::Approx(std::numbers::pi / 2).epsilon(1e-6));
}

TEST_CASE("divergence is reported") {
    IntegratorConfig cfg;
    cfg.divergence_bound = 1e3;
    auto t = integrate([](const PhaseVector& U) { return vec({U[0] * U[0]}); }, vec({1.0}), {0.0, 2.0}, cfg);
    CHECK(t.termination == Termination::Diverged);
    CHECK(t.x_end < 1.0);
}

TEST_CASE("fifth-order convergence") {
    const double p = convergence_order(oscillator, vec({0.0, 1.0}), {0.0, 4.0}, 40);
    CHECK(p == doctest::Approx(5.0).epsilon(0.05));
    const ModelSystem sys{ModelKind::CCH, {0.9, 0.05}};
    const double q = convergence_order(sys, vec({0.5, -0.2, 0.1}), {0.0, 2.0}, 40);
    CHECK(q == doctest::Approx(5.0).epsilon(0.1));
}

TEST_CASE("configuration errors") {
    IntegratorConfig cfg;
    cfg.rtol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);
    IntegratorConfig ok;
    CHECK_THROWS_AS(integrate(oscillator, vec({0.0, 1.0}), {1.0, 0.0}, ok), ContractViolation);
    CHECK_THROWS_AS(integrate(oscillator, vec({0.0, 1.0}), {0.0, 1.0}, ok, {EventSpec::crossing(4)}),
                    ContractViolation);
    const ModelSystem sys{ModelKind::HCCH, {1.0, 0.0}};
    CHECK_THROWS_AS(integrate(sys, vec({1.0, 0.0, 0.0}), {0.0, 1.0}, ok), ContractViolation);
}
