#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "lrbec/errors.hpp"
#include "lrbec/monopolar.hpp"
#include "lrbec/radial_gpe.hpp"

using namespace lrbec;
using namespace lrbec::gpe;
using doctest::Approx;

namespace {

const double kPi = std::numbers::pi;

double distance(const RadialState& a, const RadialState& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.u.size(); ++i) s += std::norm(a.u[i] - b.u[i]);
    return std::sqrt(4.0 * kPi * a.grid.h() * s);
}

cplx overlap(const RadialState& a, const RadialState& b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.u.size(); ++i) s += std::conj(a.u[i]) * b.u[i];
    return 4.0 * kPi * a.grid.h() * s;
}

const Params kOscillator{0.0, 1.0, {false, false}};

}  // namespace

TEST_CASE("Hartree potential of a Gaussian") {
    const RadialGrid g{16.0, 16383};
    const double k = 1.3;
    const auto s = gaussian_state(g, k);
    CHECK(s.norm() == Approx(1.0).epsilon(1e-12));
    const auto u = hartree(s);
    // u[0] sits at r = h; U is flat to O(h^2) there.
    const double u0 = u[0] + (u[0] - u[1]) / 3.0;
    CHECK(std::abs(u0 + 4.0 * k / std::sqrt(kPi)) < 1e-6);
    // Monopole far field of a narrow packet.
    const auto narrow = gaussian_state(g, 4.0);
    const auto un = hartree(narrow);
    for (int i : {8000, 12000, 16000}) CHECK(std::abs(un[i] + 2.0 / g.r(i)) < 1e-6);
}

TEST_CASE("Hartree potential of a uniform ball") {
    const RadialGrid g{4.0, 8191};
    const double R = 2.0;
    RadialState s{g, std::vector<cplx>(g.n)};
    const double rho = 3.0 / (4.0 * kPi * R * R * R);
    for (int i = 0; i < g.n; ++i) s.u[i] = g.r(i) < R ? g.r(i) * std::sqrt(rho) : 0.0;
    s.normalize();
    const auto u = hartree(s);
    for (int i = 0; i < g.n; i += 97) {
        const double r = g.r(i);
        const double exact = r < R ? -(3.0 - r * r / (R * R)) / R : -2.0 / r;
        CHECK(std::abs(u[i] - exact) < 2e-3);
    }
}

TEST_CASE("quadrature and Poisson forms of the Hartree potential agree") {
    for (int n : {2047, 4095}) {
        const RadialGrid g{20.0, n};
        const auto s = gaussian_state(g, 0.8);
        const auto a = hartree(s);
        const auto b = hartree_poisson(s);
        double diff = 0.0;
        for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
        CHECK(diff < 1e-8);
    }
}

TEST_CASE("oscillator residual converges at second order") {
    auto res = [](int n) {
        const RadialGrid g{12.0, n};
        return residual(gaussian_state(g, 1.0), kOscillator, 3.0);
    };
    const double r1 = res(511);
    const double r2 = res(1023);
    CHECK(r1 / r2 == Approx(4.0).epsilon(0.05));
    const auto o = observables(gaussian_state({12.0, 2047}, 1.0), kOscillator);
    CHECK(o.rms_width * o.rms_width == Approx(1.5).epsilon(1e-6));
    CHECK(o.mu == Approx(3.0).epsilon(1e-4));
}

TEST_CASE("shooting in the oscillator limit") {
    ShootOptions opt;
    opt.grid = {12.0, 2048};
    const auto r = stationary_shoot(kOscillator, Branch::stable, opt);
    CHECK(std::abs(r.mu - 3.0) < 1e-4);
    CHECK(r.residual < 1e-6);
    CHECK(r.state.norm() == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("imaginary time in the oscillator limit matches shooting") {
    const RadialGrid g{12.0, 8191};
    ShootOptions so;
    so.grid = g;
    const auto sh = stationary_shoot(kOscillator, Branch::stable, so);
    ItpOptions io;
    io.grid = g;
    const auto it = ground_itp(kOscillator, io);
    CHECK(std::abs(it.mu - 3.0) < 1e-6);
    CHECK(distance(sh.state, it.state) < 1e-6);
}

TEST_CASE("two branches at a = -0.85 and the chemical-potential identity") {
    ShootOptions opt;
    opt.grid = {64.0, 4095};
    const Params prm{-0.85, 0.0, {}};
    const auto st = stationary_shoot(prm, Branch::stable, opt);
    const auto un = stationary_shoot(prm, Branch::unstable, opt);
    CHECK(st.branch == Branch::stable);
    CHECK(un.branch == Branch::unstable);
    CHECK(st.residual < 1e-6);
    CHECK(un.residual < 1e-6);
    CHECK(std::abs(st.mu - un.mu) > 0.1);
    const auto os = observables(st.state, prm);
    const auto ou = observables(un.state, prm);
    CHECK(os.rms_width > ou.rms_width);
    for (const auto* r : {&st, &un}) {
        const auto o = observables(r->state, prm);
        CHECK(std::abs((r->mu - r->energy) - 0.5 * (o.contact + o.hartree)) < 1e-6);
    }
    // Rayleigh-Ritz: the grid ground state lies below the Gaussian optimum.
    const auto fps = mono::fixed_points({-0.85, 0.0});
    CHECK(st.energy <= fps.back().energy);
}

TEST_CASE("branches merge as the scattering length is lowered") {
    ShootOptions opt;
    opt.grid = {32.0, 2047};
    double prev_gap = 1e9;
    for (double a : {-0.5, -0.8, -0.95, -1.0}) {
        const Params prm{a, 0.0, {}};
        const auto st = stationary_shoot(prm, Branch::stable, opt);
        const auto un = stationary_shoot(prm, Branch::unstable, opt);
        const double gap = std::abs(st.mu - un.mu);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK_THROWS_AS(stationary_shoot({-1.1, 0.0, {}}, Branch::stable, opt), DomainError);
    const double fold = fold_a(0.0, -1.0, -1.1, opt, 1e-4);
    CHECK(fold < -1.0);
    CHECK(fold > -1.1);
    // No equality with the variational fold is implied.
    CHECK(fold > mono::critical_a(0.0));
}

TEST_CASE("split step keeps an eigenstate stationary") {
    const RadialGrid g{12.0, 2047};
    ItpOptions io;
    io.grid = g;
    const auto gs = ground_itp(kOscillator, io);
    RadialState s = gs.state;
    SplitStepper st(g);
    for (int i = 0; i < 10000; ++i) st.step(s, 1e-4, kOscillator, TimeMode::real);
    CHECK(std::abs(std::abs(overlap(gs.state, s)) - 1.0) < 1e-8);
}

TEST_CASE("real-time evolution conserves norm and energy") {
    const RadialGrid g{32.0, 2047};
    ShootOptions so;
    so.grid = g;
    const Params prm{-0.85, 0.0, {}};
    const auto gs = stationary_shoot(prm, Branch::stable, so);
    EvolveOptions eo;
    eo.t_end = 1.0;
    eo.dt = 1e-4;
    eo.sample_every = 1000;
    const auto tr = evolve_track(stretch(gs.state, 1.05), prm, eo);
    REQUIRE(tr.samples.size() >= 2);
    CHECK(tr.termination == TrackEnd::completed);
    const double n0 = tr.samples.front().norm;
    const double e0 = tr.samples.front().energy;
    for (const auto& smp : tr.samples) {
        CHECK(std::abs(smp.norm - n0) < 1e-10);
        CHECK(std::abs(smp.energy - e0) < 1e-6 * std::abs(e0));
    }
}

TEST_CASE("split step is second order in dt") {
    const RadialGrid g{32.0, 1023};
    ShootOptions so;
    so.grid = g;
    const Params prm{-0.85, 0.0, {}};
    const auto s0 = stretch(stationary_shoot(prm, Branch::stable, so).state, 1.2);
    auto run = [&](double dt) {
        RadialState s = s0;
        SplitStepper st(g);
        const int n = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < n; ++i) st.step(s, dt, prm, TimeMode::real);
        return s;
    };
    const auto ref = run(0.0025);
    const double e1 = distance(run(0.02), ref);
    const double e2 = distance(run(0.01), ref);
    // Error against a dt/4 reference: (1 - 1/16) / (1/4 - 1/16) = 5 for an exact second-order method.
    CHECK(e1 / e2 > 3.5);
    CHECK(e1 / e2 < 6.0);
}

TEST_CASE("stretching") {
    const RadialGrid g{32.0, 2047};
    ShootOptions so;
    so.grid = g;
    const Params prm{-0.85, 0.0, {}};
    const auto s = stationary_shoot(prm, Branch::stable, so).state;
    CHECK(distance(stretch(s, 1.0), s) < 1e-14);
    const double w0 = observables(s, prm).rms_width;
    for (double f : {0.99, 1.001, 1.25}) {
        const auto t = stretch(s, f);
        CHECK(std::abs(t.norm() - 1.0) < 1e-8);
        CHECK(observables(t, prm).rms_width == Approx(w0 * std::pow(f, -2.0 / 3.0)).epsilon(1e-6));
    }
}

TEST_CASE("checkpoint round trip") {
    const RadialGrid g{10.0, 255};
    RadialState s = gaussian_state(g, 1.1);
    for (int i = 0; i < g.n; ++i) s.u[i] *= std::polar(1.0, 0.01 * i);
    const auto path = std::filesystem::temp_directory_path() / "lrbec_checkpoint_test.bin";
    write_checkpoint(path, s);
    CHECK(std::filesystem::file_size(path) == 8 + 4 + 8 + 8 + 16 * 255);
    const auto back = read_checkpoint(path);
    CHECK(back.grid.n == g.n);
    CHECK(back.grid.r_max == g.r_max);
    CHECK(back.u == s.u);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.write("XXXX", 4);
    }
    CHECK_THROWS(read_checkpoint(path));
    std::filesystem::remove(path);
}
