#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "lrbec/dipolar.hpp"
#include "lrbec/dynamics.hpp"
#include "lrbec/monopolar.hpp"

using namespace lrbec;
using namespace lrbec::dyn;
using doctest::Approx;

namespace {

const DipolarScaled kReference{3.4e4, 6.0, 0.1};

HamSystem oscillator() {
    HamSystem sys;
    sys.dof = 1;
    sys.kinetic_factor = 0.5;
    // Centred at q = 5 so the width coordinate stays positive.
    sys.potential = [](const Vec2& q) { return 0.5 * (q[0] - 5.0) * (q[0] - 5.0); };
    sys.gradient = [](const Vec2& q) { return Vec2{q[0] - 5.0, 0.0}; };
    return sys;
}

PhaseState ground(const DipolarScaled& prm) {
    const auto set = dip::fixed_points(prm);
    return PhaseState{{set.points[0].q_rho_star, set.points[0].q_z_star}, {0.0, 0.0}};
}

}  // namespace

TEST_CASE("oscillator surrogate: bounded energy error, no secular drift") {
    const auto sys = oscillator();
    const double period = 2.0 * std::numbers::pi;
    IntegrateOptions opt;
    opt.dt = 1e-3;
    opt.t_end = period;
    const PhaseState s0{{6.0, 0.0}, {0.0, 0.0}};
    const auto one = integrate(sys, s0, opt);
    CHECK(one.max_rel_energy_error < 1e-6);
    opt.t_end = 1000.0 * period;
    opt.sample_every = 100000;
    const auto many = integrate(sys, s0, opt);
    CHECK(many.max_rel_energy_error < 1e-6);
    CHECK(many.termination == Termination::completed);
}

TEST_CASE("elliptic fixed point is stationary") {
    const mono::Params prm{-1.0, 0.0};
    const auto fps = mono::fixed_points(prm);
    const auto sys = make_system(prm);
    PhaseState s{{fps[1].q_star, 1.0}, {0.0, 0.0}};
    for (int i = 0; i < 100000; ++i) step(sys, s, 1e-3);
    CHECK(std::abs(s.q[0] - fps[1].q_star) < 1e-10);
    CHECK(std::abs(s.p[0]) < 1e-10);
}

TEST_CASE("time reversibility on a bound dipolar orbit") {
    const auto sys = make_system(kReference);
    PhaseState s = ground(kReference);
    s.q[0] *= 1.05;
    const PhaseState start = s;
    for (int i = 0; i < 20000; ++i) step(sys, s, 1e-3);
    s.p = {-s.p[0], -s.p[1]};
    for (int i = 0; i < 20000; ++i) step(sys, s, 1e-3);
    const double len = sys.length_unit;
    const double mom = len / (2.0 * sys.kinetic_factor * sys.time_unit);
    CHECK(std::abs(s.q[0] - start.q[0]) / len < 1e-8);
    CHECK(std::abs(s.q[1] - start.q[1]) / len < 1e-8);
    CHECK(std::abs(s.p[0] + start.p[0]) / mom < 1e-8);
    CHECK(std::abs(s.p[1] + start.p[1]) / mom < 1e-8);
}

TEST_CASE("one step is symplectic") {
    const DipolarScaled prm{1.0, 2.0, 0.05};
    const auto sys = make_system(prm);
    for (Scheme scheme : {Scheme::verlet, Scheme::yoshida4}) {
        const PhaseState base{{1.1, 0.6}, {0.2, -0.3}};
        Eigen::Matrix4d jac;
        for (int c = 0; c < 4; ++c) {
            const double h = 1e-6;
            PhaseState plus = base, minus = base;
            (c < 2 ? plus.q[c] : plus.p[c - 2]) += h;
            (c < 2 ? minus.q[c] : minus.p[c - 2]) -= h;
            step(sys, plus, 0.01, scheme);
            step(sys, minus, 0.01, scheme);
            jac.col(c) << (plus.q[0] - minus.q[0]) / (2 * h), (plus.q[1] - minus.q[1]) / (2 * h),
                (plus.p[0] - minus.p[0]) / (2 * h), (plus.p[1] - minus.p[1]) / (2 * h);
        }
        Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
        omega.block<2, 2>(0, 2) = Eigen::Matrix2d::Identity();
        omega.block<2, 2>(2, 0) = -Eigen::Matrix2d::Identity();
        CHECK((jac.transpose() * omega * jac - omega).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("Yoshida composition is fourth order") {
    const auto sys = oscillator();
    auto err = [&](double dt) {
        PhaseState s{{6.0, 0.0}, {0.0, 0.0}};
        const int n = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < n; ++i) step(sys, s, dt, Scheme::yoshida4);
        return std::hypot(s.q[0] - 5.0 - std::cos(1.0), s.p[0] + std::sin(1.0));
    };
    const double ratio = err(0.02) / err(0.01);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("monopolar orbits: oscillation above the fold, collapse below") {
    IntegrateOptions opt;
    opt.t_end = 200.0;
    opt.dt = 1e-3;
    opt.sample_every = 100;
    const auto fps = mono::fixed_points({-1.0, 0.0});
    const auto bound = integrate(make_system(mono::Params{-1.0, 0.0}), {{fps[1].q_star * 1.05, 1.0}, {0.0, 0.0}}, opt);
    CHECK(bound.termination == Termination::completed);
    double lo = 1e9, hi = 0.0;
    for (const auto& s : bound.states) {
        lo = std::min(lo, s.q[0]);
        hi = std::max(hi, s.q[0]);
    }
    CHECK(lo > fps[0].q_star);
    CHECK(hi < 2.0 * fps[1].q_star);
    CHECK(hi - lo > 0.1);

    const auto sys = make_system(mono::Params{-1.3, 0.0});
    const auto fall = integrate(sys, {{3.0, 1.0}, {0.0, 0.0}}, opt);
    CHECK(fall.termination == Termination::collapse);
    const auto tc = collapse_time(sys, {{3.0, 1.0}, {0.0, 0.0}}, 200.0);
    REQUIRE(tc.has_value());
    CHECK(*tc == Approx(fall.times.back()).epsilon(0.01));
}

TEST_CASE("section seeding") {
    const auto sys = make_system(kReference);
    const auto set = dip::fixed_points(kReference);
    CHECK_FALSE(well_window(kReference, 0.99 * set.points[0].energy).has_value());
    const auto win = well_window(kReference, 4.5e5);
    REQUIRE(win.has_value());
    const auto seeds = seed_on_section(sys, 4.5e5, *win, 6, 6);
    CHECK(seeds.size() >= 20);
    for (const auto& s : seeds) {
        CHECK(std::abs(sys.energy(s) - 4.5e5) <= 1e-10 * 4.5e5);
        CHECK(s.p[1] == 0.0);
    }
    // Barely above the minimum the seeds hug the fixed point.
    const double e_near = set.points[0].energy * (1.0 + 1e-3);
    const auto tight = seed_on_section(sys, e_near, *well_window(kReference, e_near), 5, 5);
    REQUIRE_FALSE(tight.empty());
    for (const auto& s : tight) {
        CHECK(std::abs(s.q[0] / set.points[0].q_rho_star - 1.0) < 0.1);
        CHECK(std::abs(s.q[1] / set.points[0].q_z_star - 1.0) < 0.1);
    }
    CHECK(seed_on_section(sys, 0.5 * set.points[0].energy, *win, 4, 4).empty());
}

TEST_CASE("section points lie on the plane and the energy shell") {
    const auto sys = make_system(kReference);
    const auto win = well_window(kReference, 4.5e5);
    const auto seeds = seed_on_section(sys, 4.5e5, *win, 3, 2);
    SectionOptions opt;
    opt.n_crossings = 30;
    const auto sections = poincare(sys, seeds, opt);
    REQUIRE(sections.size() == seeds.size());
    const double mom = sys.length_unit / (2.0 * sys.kinetic_factor * sys.time_unit);
    for (const auto& sec : sections) {
        CHECK(sec.points.size() == 30);
        double t_prev = -1.0;
        for (const auto& p : sec.points) {
            CHECK(std::abs(p.state.p[1]) / mom < 1e-10);
            CHECK(std::abs(sys.energy(p.state) - 4.5e5) < 1e-8 * 4.5e5);
            CHECK(p.im_a_rho > 0.0);
            CHECK(p.direction == 1);
            CHECK(p.t > t_prev);
            t_prev = p.t;
        }
    }
}

TEST_CASE("above the saddle, outside the islands, orbits collapse") {
    const auto sys = make_system(kReference);
    const auto set = dip::fixed_points(kReference);
    const auto& sd = set.points[1];
    // Start at the saddle with extra energy pushing inward.
    const PhaseState s{{sd.q_rho_star * 0.9, sd.q_z_star}, {-200.0, 0.0}};
    IntegrateOptions opt;
    opt.t_end = 1000.0;
    opt.sample_every = 1000;
    const auto tr = integrate(sys, s, opt);
    CHECK((tr.termination == Termination::collapse || tr.termination == Termination::escape));
}

TEST_CASE("Lyapunov exponent: regular orbits near zero") {
    const auto sys = make_system(kReference);
    PhaseState s = ground(kReference);
    s.p[0] = 10.0;  // small oscillation about the minimum
    MleOptions opt;
    opt.t_end = 1000.0;
    const auto r = mle(sys, s, opt);
    CHECK(r.termination == Termination::completed);
    CHECK(r.last_quarter_mean < 1e-3);
    CHECK(classify(Termination::completed, r, 1e-2 * ground_state_frequency(kReference)) == OrbitClass::bound_regular);

    const auto osc = oscillator();
    MleOptions o2;
    o2.t_end = 1000.0;
    const auto h = mle(osc, {{6.0, 0.0}, {0.0, 0.0}}, o2);
    CHECK(h.last_quarter_mean < 1e-2);
}

TEST_CASE("Lyapunov exponent near the saddle matches the linear growth rate") {
    const auto sys = make_system(kReference);
    const auto set = dip::fixed_points(kReference);
    const auto& sd = set.points[1];
    double growth = 0.0;
    for (const auto& ev : sd.eigenvalues) growth = std::max(growth, ev.real());
    growth *= sys.time_unit;

    // Unstable eigenvector of the flow in natural units.
    const dip::Hessian hs = dip::hessian(sd.q_rho_star, sd.q_z_star, kReference);
    Eigen::Matrix2d m;
    m << hs[0][0], hs[0][1], hs[1][0], hs[1][1];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    const Eigen::Vector2d v = es.eigenvectors().col(0);
    const double len = sys.length_unit;
    const double mom = len / (2.0 * sys.kinetic_factor * sys.time_unit);
    const double rate = std::sqrt(-es.eigenvalues()(0) * sys.kinetic_factor * 2.0) * sys.time_unit;
    CHECK(rate == Approx(growth).epsilon(1e-6));
    // Along the unstable direction dq = v, dp = rate * v / (2 k time_unit) scaled to natural units.
    const double d = 1e-4;
    const double pscale = growth / (2.0 * sys.kinetic_factor * sys.time_unit) * len / mom;
    PhaseState s{{sd.q_rho_star + d * len * v[0], sd.q_z_star + d * len * v[1]},
                 {d * mom * pscale * v[0], d * mom * pscale * v[1]}};
    MleOptions opt;
    opt.t_end = std::floor(std::log(1e2) / growth);
    opt.direction = std::array<double, 4>{v[0], v[1], pscale * v[0], pscale * v[1]};
    const auto r = mle(sys, s, opt);
    CHECK(r.estimate > 0.0);
    CHECK(r.estimate == Approx(growth).epsilon(0.2));
}
