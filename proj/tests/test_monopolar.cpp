#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lrbec/monopolar.hpp"

using namespace lrbec::mono;
using doctest::Approx;

namespace {
const double kPi = std::numbers::pi;
const double kRoot = std::sqrt(3.0 / kPi);
const double kFold = -3.0 * kPi / 8.0;
}  // namespace

TEST_CASE("energy examples") {
    CHECK(energy({1.0, 0.0}, {0.0, 0.0}) == Approx(2.25 - kRoot).epsilon(1e-14));
    CHECK(energy({1.0, 0.0}, {0.0, 0.0}) == Approx(1.27280).epsilon(1e-5));
    CHECK(energy({1e8, 1.0}, {-1.0, 0.0}) == Approx(1.0).epsilon(1e-7));
    const double q = 9.0 * std::sqrt(kPi) / (4.0 * std::sqrt(3.0));
    CHECK(q == Approx(2.30247).epsilon(1e-5));
    CHECK(energy({q, 0.0}, {kFold, 0.0}) == Approx(potential(q, {kFold, 0.0})));
    CHECK(potential(2.0, {0.0, 0.5}) == Approx(potential(2.0, {0.0, 0.0}) + 0.25 * 4.0));
}

TEST_CASE("force examples and finite differences") {
    const double q0 = 9.0 * std::sqrt(kPi) / (2.0 * std::sqrt(3.0));
    CHECK(q0 == Approx(4.60494).epsilon(1e-5));
    CHECK(std::abs(force(q0, {0.0, 0.0})) < 1e-14);
    CHECK(force(1.0, {0.0, 0.0}) == Approx(4.5 - kRoot).epsilon(1e-14));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> qd(0.5, 10.0);
    std::uniform_real_distribution<double> ad(-1.5, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double q = qd(rng);
        const Params prm{ad(rng), 0.3};
        const double h = 1e-5;
        const double fd = -(potential(q + h, prm) - potential(q - h, prm)) / (2 * h);
        CHECK(force(q, prm) == Approx(fd).epsilon(1e-6));
        const double cd = -(force(q + h, prm) - force(q - h, prm)) / (2 * h);
        CHECK(curvature(q, prm) == Approx(cd).epsilon(1e-5));
    }
}

TEST_CASE("fixed points at gamma = 0") {
    auto fps = fixed_points({-1.0, 0.0});
    REQUIRE(fps.size() == 2);
    // Roots of sqrt(3/pi) q^2 - 9/2 q - 9/2 sqrt(3/pi) a = 0.
    const double disc = std::sqrt(20.25 - 4.0 * kRoot * 4.5 * kRoot);
    CHECK(fps[0].q_star == Approx((4.5 - disc) / (2.0 * kRoot)).epsilon(1e-12));
    CHECK(fps[1].q_star == Approx((4.5 + disc) / (2.0 * kRoot)).epsilon(1e-12));
    CHECK(fps[0].q_star == Approx(1.40746).epsilon(2e-4));
    CHECK(fps[1].q_star == Approx(3.19751).epsilon(2e-4));
    CHECK(fps[0].q_star * fps[1].q_star == Approx(4.5).epsilon(1e-12));
    CHECK(fps[0].kind == Kind::hyperbolic);
    CHECK(fps[1].kind == Kind::elliptic);
    CHECK(fps[0].energy > fps[1].energy);

    CHECK(fixed_points({-1.3, 0.0}).empty());

    fps = fixed_points({kFold, 0.0});
    REQUIRE(fps.size() == 1);
    CHECK(fps[0].kind == Kind::degenerate);
    CHECK(fps[0].q_star == Approx(9.0 * std::sqrt(kPi) / (4.0 * std::sqrt(3.0))).epsilon(1e-10));

    CHECK(fixed_points({0.0, 0.0}).size() == 1);
    CHECK(fixed_points({0.5, 0.0}).size() == 1);
    CHECK(fixed_points({-0.5, 0.0}).size() == 2);
}

TEST_CASE("fixed points are equilibria of the flow") {
    for (double a : {-1.1, -0.85, -0.3}) {
        for (const auto& fp : fixed_points({a, 0.0})) {
            CHECK(std::abs(force(fp.q_star, {a, 0.0})) < 1e-10);
        }
    }
    for (const auto& fp : fixed_points({-0.5, 0.2})) CHECK(std::abs(force(fp.q_star, {-0.5, 0.2})) < 1e-10);
}

TEST_CASE("critical scattering length") {
    CHECK(critical_a(0.0) == kFold);
    CHECK(critical_a(1e-9) == Approx(kFold).epsilon(1e-8));
    // Bisection on the fixed-point count.
    double lo = -1.3, hi = -1.0;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (fixed_points({mid, 0.0}).empty() ? lo : hi) = mid;
    }
    CHECK(std::abs(0.5 * (lo + hi) - kFold) < 1e-6);
    // A trap squeezes the cloud, so the fold moves to weaker attraction.
    const double g = 0.05;
    const double ac = critical_a(g);
    CHECK(ac > kFold);
    CHECK(fixed_points({ac - 1e-6, g}).size() <= 1);
    CHECK(fixed_points({ac + 1e-6, g}).size() >= 2);
}

TEST_CASE("stability") {
    auto fps = fixed_points({-1.0, 0.0});
    auto s0 = stability(fps[0].q_star, {-1.0, 0.0});
    auto s1 = stability(fps[1].q_star, {-1.0, 0.0});
    CHECK(s0.kind == Kind::hyperbolic);
    CHECK(s1.kind == Kind::elliptic);
    CHECK(s1.eigen == Approx(std::sqrt(2.0 * curvature(fps[1].q_star, {-1.0, 0.0}))));
    const double qf = 9.0 * std::sqrt(kPi) / (4.0 * std::sqrt(3.0));
    CHECK(stability(qf, {kFold, 0.0}).kind == Kind::degenerate);
}

TEST_CASE("chemical potential") {
    const double q0 = 9.0 * std::sqrt(kPi) / (2.0 * std::sqrt(3.0));
    CHECK(chemical_potential(q0, {0.0, 0.0}) == Approx(-1.0 / kPi).epsilon(1e-12));
    CHECK(potential(q0, {0.0, 0.0}) == Approx(-1.0 / (3.0 * kPi)).epsilon(1e-12));
    auto fps = fixed_points({-1.0, 0.0});
    CHECK(std::abs(fps[0].mu - fps[1].mu) > 1e-3);
    auto near = fixed_points({kFold + 1e-10, 0.0});
    REQUIRE(near.size() == 2);
    CHECK(std::abs(near[0].mu - near[1].mu) < 1e-3);
    CHECK(std::abs(near[0].energy - near[1].energy) < 1e-6);
}

TEST_CASE("complex width maps") {
    auto s = from_width({0.0, 0.75});
    CHECK(s.q == Approx(1.0));
    CHECK(s.p == Approx(0.0));
    s = from_width({0.5, 0.75});
    CHECK(s.q == Approx(1.0));
    CHECK(s.p == Approx(1.0));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ar(-3.0, 3.0), ai(1e-3, 10.0);
    for (int i = 0; i < 100; ++i) {
        const WidthParam w{ar(rng), ai(rng)};
        const WidthParam b = to_width(from_width(w));
        CHECK(b.a_r == Approx(w.a_r).epsilon(1e-12));
        CHECK(b.a_i == Approx(w.a_i).epsilon(1e-12));
    }
}
