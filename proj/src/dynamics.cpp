#include "lrbec/dynamics.hpp"

#include <algorithm>
#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>

#include "lrbec/errors.hpp"
#include "lrbec/parallel.hpp"

namespace lrbec::dyn {

namespace {

// Yoshida 4th-order composition weights.
const double kCbrt2 = std::cbrt(2.0);
const double kYoshidaOuter = 1.0 / (2.0 - kCbrt2);
const double kYoshidaInner = -kCbrt2 / (2.0 - kCbrt2);

// Kick-drift-kick with the gradient at the start cached between calls.
class Stepper {
public:
    Stepper(const HamSystem& sys, Scheme scheme) : sys_(sys), scheme_(scheme) {}

    void reset() { have_grad_ = false; }

    StepStatus advance(PhaseState& s, double h) {
        if (scheme_ == Scheme::verlet) return kdk(s, h);
        if (kdk(s, kYoshidaOuter * h) != StepStatus::ok) return StepStatus::collapse_candidate;
        if (kdk(s, kYoshidaInner * h) != StepStatus::ok) return StepStatus::collapse_candidate;
        return kdk(s, kYoshidaOuter * h);
    }

private:
    StepStatus kdk(PhaseState& s, double h) {
        if (!have_grad_) grad_ = sys_.gradient(s.q);
        const double drift = 2.0 * sys_.kinetic_factor * h;
        for (int i = 0; i < sys_.dof; ++i) {
            s.p[i] -= 0.5 * h * grad_[i];
            s.q[i] += drift * s.p[i];
        }
        for (int i = 0; i < sys_.dof; ++i) {
            if (!(s.q[i] > 0.0)) {
                have_grad_ = false;
                return StepStatus::collapse_candidate;
            }
        }
        grad_ = sys_.gradient(s.q);
        for (int i = 0; i < sys_.dof; ++i) s.p[i] -= 0.5 * h * grad_[i];
        have_grad_ = true;
        return StepStatus::ok;
    }

    const HamSystem& sys_;
    Scheme scheme_;
    Vec2 grad_{};
    bool have_grad_ = false;
};

bool escaping(const HamSystem& sys, const PhaseState& s, double escape_width) {
    for (int i = 0; i < sys.dof; ++i)
        if (s.q[i] > escape_width * sys.length_unit && s.p[i] > 0.0) return true;
    return false;
}

double coordinate(const PhaseState& s, Coordinate c) {
    switch (c) {
        case Coordinate::q_rho: return s.q[0];
        case Coordinate::q_z: return s.q[1];
        case Coordinate::p_rho: return s.p[0];
        case Coordinate::p_z: return s.p[1];
    }
    return 0.0;
}

// Time derivative of the section coordinate.
double coordinate_rate(const HamSystem& sys, const PhaseState& s, Coordinate c) {
    switch (c) {
        case Coordinate::q_rho: return 2.0 * sys.kinetic_factor * s.p[0];
        case Coordinate::q_z: return 2.0 * sys.kinetic_factor * s.p[1];
        case Coordinate::p_rho: return -sys.gradient(s.q)[0];
        case Coordinate::p_z: return -sys.gradient(s.q)[1];
    }
    return 0.0;
}

// Locates the crossing inside one step: Hermite interpolation for the first
// guess, then safeguarded Newton/bisection on the sub-step length.
PhaseState refine_crossing(const HamSystem& sys, const PhaseState& before, const PhaseState& after,
                           double h, const SectionOptions& opt, double& tau_out) {
    const auto f = [&](const PhaseState& s) { return coordinate(s, opt.plane) - opt.plane_value; };
    const auto substep = [&](double tau) {
        PhaseState s = before;
        if (tau > 0.0) {
            Stepper st(sys, opt.scheme);
            st.advance(s, tau);
        }
        return s;
    };
    const double f0 = f(before);
    const double f1 = f(after);
    const double d0 = coordinate_rate(sys, before, opt.plane) * h;
    const double d1 = coordinate_rate(sys, after, opt.plane) * h;

    double lo = 0.0, hi = 1.0;  // fractions of h
    double f_lo = f0;
    // cubic Hermite on [0, 1]; pick its root by a few Newton steps from the linear guess
    double x = f0 / (f0 - f1);
    for (int i = 0; i < 8; ++i) {
        const double x2 = x * x, x3 = x2 * x;
        const double val = (2 * x3 - 3 * x2 + 1) * f0 + (x3 - 2 * x2 + x) * d0 + (-2 * x3 + 3 * x2) * f1 +
                           (x3 - x2) * d1;
        const double der = (6 * x2 - 6 * x) * f0 + (3 * x2 - 4 * x + 1) * d0 + (-6 * x2 + 6 * x) * f1 +
                           (3 * x2 - 2 * x) * d1;
        if (der == 0.0) break;
        const double nx = x - val / der;
        if (!(nx > 0.0 && nx < 1.0)) break;
        x = nx;
    }

    PhaseState best = after;
    double best_val = std::abs(f1);
    tau_out = h;
    for (int it = 0; it < 100; ++it) {
        const PhaseState s = substep(x * h);
        const double val = f(s);
        if (std::abs(val) < best_val) {
            best_val = std::abs(val);
            best = s;
            tau_out = x * h;
        }
        if (best_val < 1e-10 || hi - lo < 1e-15) break;
        if ((val > 0.0) == (f_lo > 0.0)) {
            lo = x;
            f_lo = val;
        } else {
            hi = x;
        }
        const double rate = coordinate_rate(sys, s, opt.plane) * h;
        double nx = rate != 0.0 ? x - val / rate : 0.5 * (lo + hi);
        if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
        x = nx;
    }
    return best;
}

}  // namespace

double HamSystem::kinetic(const PhaseState& s) const {
    double t = 0.0;
    for (int i = 0; i < dof; ++i) t += s.p[i] * s.p[i];
    return kinetic_factor * t;
}

double HamSystem::energy(const PhaseState& s) const { return kinetic(s) + potential(s.q); }

double HamSystem::min_width(const PhaseState& s) const {
    return dof == 1 ? s.q[0] : std::min(s.q[0], s.q[1]);
}

double HamSystem::max_width(const PhaseState& s) const {
    return dof == 1 ? s.q[0] : std::max(s.q[0], s.q[1]);
}

HamSystem make_system(const mono::Params& prm) {
    HamSystem sys;
    sys.dof = 1;
    sys.kinetic_factor = 1.0;
    sys.potential = [prm](const Vec2& q) { return mono::potential(q[0], prm); };
    sys.gradient = [prm](const Vec2& q) { return Vec2{-mono::force(q[0], prm), 0.0}; };
    return sys;
}

HamSystem make_system(const DipolarScaled& prm) {
    validate(prm);
    HamSystem sys;
    sys.dof = 2;
    sys.kinetic_factor = 0.5;
    sys.potential = [prm](const Vec2& q) { return dip::potential(q[0], q[1], prm); };
    sys.gradient = [prm](const Vec2& q) {
        const dip::Gradient g = dip::gradient(q[0], q[1], prm);
        return Vec2{g.d_rho, g.d_z};
    };
    sys.length_unit = dip::trap_length(prm);
    sys.time_unit = dip::trap_time(prm);
    return sys;
}

PhaseState to_phase(const mono::State& s) { return {{s.q, 1.0}, {s.p, 0.0}}; }

PhaseState to_phase(const dip::State& s) { return {{s.q_rho, s.q_z}, {s.p_rho, s.p_z}}; }

dip::State to_dip(const PhaseState& s) { return {s.q[0], s.q[1], s.p[0], s.p[1]}; }

StepStatus step(const HamSystem& sys, PhaseState& s, double dt, Scheme scheme) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    Stepper st(sys, scheme);
    return st.advance(s, dt * sys.time_unit);
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::collapse: return "collapse";
        case Termination::escape: return "escape";
        case Termination::step_limit: return "step-limit";
    }
    return "?";
}

Termination propagate(const HamSystem& sys, PhaseState& s, double& t, const IntegrateOptions& opt,
                      const StepVisitor& visit) {
    if (!(opt.dt > 0.0)) throw ConfigError("time step must be positive");
    for (int i = 0; i < sys.dof; ++i)
        if (!(s.q[i] > 0.0)) throw ConfigError("initial widths must be positive");
    const long long wanted = std::llround(std::max(0.0, opt.t_end - t) / opt.dt);
    const long long n = std::min(wanted, opt.max_steps);
    const double h = opt.dt * sys.time_unit;
    const double t0 = t;
    Stepper st(sys, opt.scheme);
    for (long long k = 0; k < n; ++k) {
        const PhaseState before = s;
        const double t_before = t;
        if (st.advance(s, h) != StepStatus::ok) return Termination::collapse;
        t = t0 + static_cast<double>(k + 1) * opt.dt;
        if (sys.min_width(s) < opt.collapse_width * sys.length_unit) return Termination::collapse;
        if (escaping(sys, s, opt.escape_width)) return Termination::escape;
        if (visit && !visit(t_before, before, s)) return Termination::completed;
    }
    return wanted > n ? Termination::step_limit : Termination::completed;
}

Trajectory integrate(const HamSystem& sys, const PhaseState& s0, const IntegrateOptions& opt) {
    Trajectory tr;
    const double e0 = sys.energy(s0);
    const double e_scale = std::abs(e0) > 0.0 ? std::abs(e0) : 1.0;
    tr.times.push_back(0.0);
    tr.states.push_back(s0);
    tr.energies.push_back(e0);
    PhaseState s = s0;
    double t = 0.0;
    const int every = std::max(1, opt.sample_every);
    tr.termination = propagate(sys, s, t, opt, [&](double, const PhaseState&, const PhaseState& after) {
        ++tr.steps;
        if (tr.steps % every == 0) {
            const double e = sys.energy(after);
            tr.max_rel_energy_error = std::max(tr.max_rel_energy_error, std::abs(e - e0) / e_scale);
            tr.times.push_back(static_cast<double>(tr.steps) * opt.dt);
            tr.states.push_back(after);
            tr.energies.push_back(e);
        }
        return true;
    });
    return tr;
}

std::optional<double> collapse_time(const HamSystem& sys, const PhaseState& s0, double t_max,
                                    double collapse_width, double rel_tol) {
    namespace ode = boost::numeric::odeint;
    using state_type = std::vector<double>;
    const int d = sys.dof;
    const double tu = sys.time_unit;
    const auto rhs = [&](const state_type& x, state_type& dxdt, double) {
        Vec2 q{x[0], d == 2 ? x[1] : 1.0};
        bool valid = true;
        for (int i = 0; i < d; ++i) valid = valid && q[i] > 0.0;
        if (!valid) {
            std::fill(dxdt.begin(), dxdt.end(), std::numeric_limits<double>::max() * 1e-10);
            return;
        }
        const Vec2 g = sys.gradient(q);
        for (int i = 0; i < d; ++i) {
            dxdt[i] = 2.0 * sys.kinetic_factor * x[d + i] * tu;
            dxdt[d + i] = -g[i] * tu;
        }
    };
    state_type x(2 * d);
    for (int i = 0; i < d; ++i) {
        x[i] = s0.q[i];
        x[d + i] = s0.p[i];
    }
    auto stepper = ode::make_dense_output(rel_tol, rel_tol, ode::runge_kutta_dopri5<state_type>());
    stepper.initialize(x, 0.0, 1e-6 * std::max(1.0, t_max));
    const double threshold = collapse_width * sys.length_unit;
    const auto min_width = [d](const state_type& y) {
        double w = y[0];
        for (int i = 1; i < d; ++i) w = std::min(w, y[i]);
        return w;
    };
    state_type y(2 * d);
    while (stepper.current_time() < t_max) {
        stepper.do_step(rhs);
        if (min_width(stepper.current_state()) >= threshold) continue;
        double lo = stepper.previous_time();
        double hi = stepper.current_time();
        for (int it = 0; it < 80 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            stepper.calc_state(mid, y);
            (min_width(y) < threshold ? hi : lo) = mid;
        }
        const double tc = 0.5 * (lo + hi);
        if (tc > t_max) break;
        return tc;
    }
    return std::nullopt;
}

std::vector<OrbitSection> poincare(const HamSystem& sys, std::span<const PhaseState> seeds,
                                   const SectionOptions& opt, int workers) {
    if (sys.dof != 2) throw ConfigError("surfaces of section need a two-degree-of-freedom system");
    if (seeds.empty()) return {};
    const double e_ref = sys.energy(seeds[0]);
    for (const auto& s : seeds)
        if (std::abs(sys.energy(s) - e_ref) > 1e-8 * std::abs(e_ref))
            throw ConfigError("section seeds must share one energy to 1e-8 relative");

    std::vector<OrbitSection> out(seeds.size());
    parallel_for(seeds.size(), workers, [&](std::size_t idx) {
        OrbitSection& sec = out[idx];
        PhaseState s = seeds[idx];
        double t = 0.0;
        IntegrateOptions io;
        io.t_end = opt.t_max;
        io.dt = opt.dt;
        io.scheme = opt.scheme;
        io.collapse_width = opt.collapse_width;
        io.escape_width = opt.escape_width;
        const double h = opt.dt * sys.time_unit;
        sec.termination = propagate(sys, s, t, io, [&](double t0, const PhaseState& a, const PhaseState& b) {
            const double fa = coordinate(a, opt.plane) - opt.plane_value;
            const double fb = coordinate(b, opt.plane) - opt.plane_value;
            int dir = 0;
            if (fa < 0.0 && fb >= 0.0) dir = +1;
            else if (fa > 0.0 && fb <= 0.0) dir = -1;
            if (dir == 0) return true;
            if (opt.direction == Direction::positive && dir < 0) return true;
            if (opt.direction == Direction::negative && dir > 0) return true;
            double tau = 0.0;
            const PhaseState c = refine_crossing(sys, a, b, h, opt, tau);
            const dip::WidthParams w = dip::to_width(to_dip(c));
            SectionPoint pt;
            pt.re_a_rho = w.a_rho_r;
            pt.im_a_rho = w.a_rho_i;
            pt.t = t0 + tau / sys.time_unit;
            pt.orbit = static_cast<int>(idx);
            pt.direction = dir;
            pt.state = c;
            sec.points.push_back(pt);
            return static_cast<int>(sec.points.size()) < opt.n_crossings;
        });
    });
    return out;
}

std::vector<PhaseState> seed_on_section(const HamSystem& sys, double energy, const SeedWindow& window,
                                        int n_q, int n_p) {
    if (sys.dof != 2) throw ConfigError("section seeding needs a two-degree-of-freedom system");
    std::vector<PhaseState> seeds;
    const int scan = 800;
    const double lz_lo = std::log(1e-2 * sys.length_unit);
    const double lz_hi = std::log(1e3 * sys.length_unit);
    for (int i = 0; i < n_q; ++i) {
        const double qr = n_q == 1 ? 0.5 * (window.q_rho_lo + window.q_rho_hi)
                                   : window.q_rho_lo + (window.q_rho_hi - window.q_rho_lo) * i / (n_q - 1);
        if (!(qr > 0.0)) continue;
        for (int j = 0; j < n_p; ++j) {
            const double pr = n_p == 1 ? 0.5 * (window.p_rho_lo + window.p_rho_hi)
                                       : window.p_rho_lo + (window.p_rho_hi - window.p_rho_lo) * j / (n_p - 1);
            const double target = energy - sys.kinetic_factor * pr * pr;
            const auto f = [&](double qz) { return sys.potential({qr, qz}) - target; };
            double z_prev = std::exp(lz_lo);
            double f_prev = f(z_prev);
            for (int k = 1; k <= scan; ++k) {
                const double z = std::exp(lz_lo + (lz_hi - lz_lo) * k / scan);
                const double fz = f(z);
                if ((f_prev > 0.0) != (fz > 0.0)) {
                    double lo = z_prev, hi = z, flo = f_prev;
                    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        const double fm = f(mid);
                        if ((fm > 0.0) == (flo > 0.0)) {
                            lo = mid;
                            flo = fm;
                        } else {
                            hi = mid;
                        }
                    }
                    const double qz = std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
                    PhaseState s{{qr, qz}, {pr, 0.0}};
                    if (std::abs(sys.energy(s) - energy) <= 1e-10 * std::abs(energy)) seeds.push_back(s);
                }
                z_prev = z;
                f_prev = fz;
            }
        }
    }
    return seeds;
}

std::optional<SeedWindow> section_window(const HamSystem& sys, double energy) {
    if (sys.dof != 2) throw ConfigError("section window needs a two-degree-of-freedom system");
    const int n = 600;
    const double l_lo = std::log(1e-2 * sys.length_unit);
    const double l_hi = std::log(1e3 * sys.length_unit);
    const auto grid = [&](int k) { return std::exp(l_lo + (l_hi - l_lo) * k / n); };
    double q_lo = std::numeric_limits<double>::infinity();
    double q_hi = 0.0;
    double v_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
        const double qr = grid(i);
        double vm = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= n; ++k) vm = std::min(vm, sys.potential({qr, grid(k)}));
        if (vm < energy) {
            q_lo = std::min(q_lo, i > 0 ? grid(i - 1) : qr);
            q_hi = std::max(q_hi, i < n ? grid(i + 1) : qr);
            v_min = std::min(v_min, vm);
        }
    }
    if (!(q_hi > 0.0)) return std::nullopt;
    const double p_max = std::sqrt((energy - v_min) / sys.kinetic_factor);
    return SeedWindow{q_lo, q_hi, -p_max, p_max};
}

namespace {

struct WellPoints {
    dip::FixedPoint minimum;
    std::optional<dip::FixedPoint> saddle;
};

WellPoints well_points(const DipolarScaled& prm) {
    const dip::FixedPointSet set = dip::fixed_points(prm);
    WellPoints w;
    bool found = false;
    for (const auto& fp : set.points) {
        if (fp.kind == dip::Kind::minimum && !found) {
            w.minimum = fp;
            found = true;
        } else if (fp.kind == dip::Kind::saddle && !w.saddle) {
            w.saddle = fp;
        }
    }
    if (!found) throw DomainError("branch-not-found: no ground state at these parameters");
    return w;
}

}  // namespace

std::optional<SeedWindow> well_window(const DipolarScaled& prm, double energy) {
    const WellPoints w = well_points(prm);
    if (!(energy > w.minimum.energy)) return std::nullopt;
    const double len = dip::trap_length(prm);
    const int scan = 2000;
    const auto floor_at = [&](double qr) {
        double v = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= scan; ++k) {
            const double qz = len * std::exp(std::log(1e-2) + std::log(1e5) * k / scan);
            v = std::min(v, dip::potential(qr, qz, prm));
        }
        return v;
    };
    const double ratio = 1.001;
    const double inner = w.saddle ? w.saddle->q_rho_star : 0.0;
    double hi = w.minimum.q_rho_star;
    while (floor_at(hi * ratio) < energy && hi < 1e3 * len) hi *= ratio;
    double lo = w.minimum.q_rho_star;
    while (lo / ratio > inner && lo > 1e-2 * len && floor_at(lo / ratio) < energy) lo /= ratio;
    const double p_max = std::sqrt(2.0 * (energy - w.minimum.energy));
    return SeedWindow{lo, hi, -p_max, p_max};
}

PhaseState near_saddle_seed(const DipolarScaled& prm, double energy) {
    const WellPoints w = well_points(prm);
    if (!w.saddle) throw DomainError("branch-not-found: no saddle at these parameters");
    const dip::FixedPoint& s = *w.saddle;
    if (!(energy < s.energy && energy > w.minimum.energy))
        throw DomainError("near-saddle seed needs an energy between the ground state and the saddle");
    const dip::Hessian hs = dip::hessian(s.q_rho_star, s.q_z_star, prm);
    Eigen::Matrix2d m;
    m << hs[0][0], hs[0][1], hs[1][0], hs[1][1];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    Eigen::Vector2d v = es.eigenvectors().col(0);
    const Eigen::Vector2d to_min(w.minimum.q_rho_star - s.q_rho_star, w.minimum.q_z_star - s.q_z_star);
    if (v.dot(to_min) < 0.0) v = -v;
    const auto at = [&](double d) { return Vec2{s.q_rho_star + d * v[0], s.q_z_star + d * v[1]}; };
    double lo = 0.0;
    double hi = to_min.norm();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (dip::potential(at(mid)[0], at(mid)[1], prm) > energy ? lo : hi) = mid;
    }
    return PhaseState{at(hi), {0.0, 0.0}};
}

MleResult mle(const HamSystem& sys, const PhaseState& s0, const MleOptions& opt) {
    if (!(opt.dt > 0.0) || !(opt.renorm_interval > 0.0)) throw ConfigError("dt and renorm interval must be positive");
    const double len = sys.length_unit;
    const double mom = len / (2.0 * sys.kinetic_factor * sys.time_unit);
    const int d = sys.dof;
    std::array<double, 4> dir{1.0, 1.0, 1.0, 1.0};
    if (opt.direction) dir = *opt.direction;
    double norm = 0.0;
    for (int i = 0; i < d; ++i) norm += dir[i] * dir[i] + dir[2 + i] * dir[2 + i];
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) throw ConfigError("separation direction must be non-zero");

    const auto distance = [&](const PhaseState& a, const PhaseState& b) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
            const double dq = (b.q[i] - a.q[i]) / len;
            const double dp = (b.p[i] - a.p[i]) / mom;
            s += dq * dq + dp * dp;
        }
        return std::sqrt(s);
    };

    PhaseState a = s0;
    PhaseState b = s0;
    for (int i = 0; i < d; ++i) {
        b.q[i] += opt.separation * dir[i] / norm * len;
        b.p[i] += opt.separation * dir[2 + i] / norm * mom;
    }

    MleResult res;
    Stepper sa(sys, opt.scheme), sb(sys, opt.scheme);
    const double h = opt.dt * sys.time_unit;
    const long long n = std::llround(opt.t_end / opt.dt);
    const long long every = std::max<long long>(1, std::llround(opt.renorm_interval / opt.dt));
    double sum_log = 0.0;
    for (long long k = 1; k <= n; ++k) {
        if (sa.advance(a, h) != StepStatus::ok || sb.advance(b, h) != StepStatus::ok ||
            sys.min_width(a) < opt.collapse_width * len) {
            res.termination = Termination::collapse;
            res.partial = true;
            break;
        }
        if (escaping(sys, a, opt.escape_width)) {
            res.termination = Termination::escape;
            res.partial = true;
            break;
        }
        if (k % every == 0 || k == n) {
            const double dist = distance(a, b);
            sum_log += std::log(dist / opt.separation);
            const double scale = opt.separation / dist;
            for (int i = 0; i < d; ++i) {
                b.q[i] = a.q[i] + (b.q[i] - a.q[i]) * scale;
                b.p[i] = a.p[i] + (b.p[i] - a.p[i]) * scale;
            }
            sb.reset();
            const double t = static_cast<double>(k) * opt.dt;
            res.times.push_back(t);
            res.running.push_back(sum_log / t);
        }
    }
    if (!res.running.empty()) {
        res.estimate = res.running.back();
        const std::size_t from = res.running.size() * 3 / 4;
        double acc = 0.0;
        for (std::size_t i = from; i < res.running.size(); ++i) acc += res.running[i];
        res.last_quarter_mean = acc / static_cast<double>(res.running.size() - from);
    }
    return res;
}

const char* to_string(OrbitClass c) {
    switch (c) {
        case OrbitClass::bound_regular: return "bound-regular";
        case OrbitClass::bound_chaotic: return "bound-chaotic";
        case OrbitClass::collapse: return "collapse";
        case OrbitClass::escape: return "escape";
    }
    return "?";
}

OrbitClass classify(Termination termination, const MleResult& m, double threshold) {
    if (termination == Termination::collapse || m.termination == Termination::collapse)
        return OrbitClass::collapse;
    if (termination == Termination::escape || m.termination == Termination::escape)
        return OrbitClass::escape;
    return m.last_quarter_mean < threshold ? OrbitClass::bound_regular : OrbitClass::bound_chaotic;
}

double ground_state_frequency(const DipolarScaled& prm) {
    const dip::FixedPointSet set = dip::fixed_points(prm);
    for (const auto& fp : set.points) {
        if (fp.kind != dip::Kind::minimum) continue;
        double w = std::numeric_limits<double>::infinity();
        for (const auto& ev : fp.eigenvalues) w = std::min(w, std::abs(ev.imag()));
        return w * dip::trap_time(prm);
    }
    throw DomainError("no ground state at these parameters");
}

}  // namespace lrbec::dyn
