#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrbec/dipolar.hpp"
#include "lrbec/monopolar.hpp"
#include "lrbec/units.hpp"

namespace lrbec::dyn {

using Vec2 = std::array<double, 2>;

/// Canonical point (q, p). Only the first `dof` components are used.
struct PhaseState {
    Vec2 q{1.0, 1.0};
    Vec2 p{0.0, 0.0};
};

/// Separable Hamiltonian H = kinetic_factor * |p|^2 + V(q) with 1 or 2 degrees of freedom.
struct HamSystem {
    int dof = 1;
    double kinetic_factor = 1.0;
    std::function<double(const Vec2&)> potential;
    std::function<Vec2(const Vec2&)> gradient;  ///< dV/dq
    double length_unit = 1.0;                   ///< natural width scale
    double time_unit = 1.0;                     ///< natural time scale

    [[nodiscard]] double energy(const PhaseState& s) const;
    [[nodiscard]] double kinetic(const PhaseState& s) const;
    [[nodiscard]] double min_width(const PhaseState& s) const;
    [[nodiscard]] double max_width(const PhaseState& s) const;
};

/// H = p^2 + V(q) of the isotropic Gaussian for the 1/r gas.
HamSystem make_system(const mono::Params& prm);

/// H = (p_rho^2 + p_z^2)/2 + V(q_rho, q_z) of the axisymmetric dipolar Gaussian.
/// Lengths in units of 1/sqrt(N^2 gamma_bar), times in 1/(2 N^2 gamma_bar).
HamSystem make_system(const DipolarScaled& prm);

PhaseState to_phase(const mono::State& s);
PhaseState to_phase(const dip::State& s);
dip::State to_dip(const PhaseState& s);

enum class Scheme { verlet, yoshida4 };

enum class StepStatus { ok, collapse_candidate };

/// One kick-drift-kick step (or its 4th-order Yoshida composition). Leaves the
/// state after the offending drift and reports collapse_candidate if a width
/// became non-positive.
StepStatus step(const HamSystem& sys, PhaseState& s, double dt, Scheme scheme = Scheme::verlet);

enum class Termination { completed, collapse, escape, step_limit };

const char* to_string(Termination t);

struct IntegrateOptions {
    double t_end = 1.0;
    double dt = 1e-3;
    Scheme scheme = Scheme::verlet;
    int sample_every = 1;
    long long max_steps = 100'000'000;
    double collapse_width = 1e-2;  ///< in length units
    double escape_width = 1e3;     ///< in length units
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PhaseState> states;
    std::vector<double> energies;
    Termination termination = Termination::completed;
    double max_rel_energy_error = 0.0;
    long long steps = 0;
};

/// Fixed-step symplectic integration with collapse and escape monitors.
/// All times, here and below, are in multiples of sys.time_unit.
Trajectory integrate(const HamSystem& sys, const PhaseState& s0, const IntegrateOptions& opt);

/// Low-level loop shared by integrate, poincare and mle. The visitor sees each
/// accepted step as (t_before, before, after) and returns false to stop.
using StepVisitor = std::function<bool(double, const PhaseState&, const PhaseState&)>;
Termination propagate(const HamSystem& sys, PhaseState& s, double& t, const IntegrateOptions& opt,
                      const StepVisitor& visit);

/// Collapse time from an adaptive embedded Runge-Kutta (Dormand-Prince 5(4))
/// integration; empty if no collapse before t_max. Energy is not conserved.
std::optional<double> collapse_time(const HamSystem& sys, const PhaseState& s0, double t_max,
                                    double collapse_width = 1e-2, double rel_tol = 1e-10);

// ----- Poincare sections ---------------------------------------------------

enum class Direction { positive, negative, both };

/// Phase-space coordinate that defines the section plane.
enum class Coordinate { q_rho, q_z, p_rho, p_z };

struct SectionPoint {
    double re_a_rho = 0.0;
    double im_a_rho = 0.0;
    double t = 0.0;
    int orbit = 0;
    int direction = +1;  ///< sign of the crossing velocity
    PhaseState state;    ///< refined crossing state
};

struct OrbitSection {
    std::vector<SectionPoint> points;
    Termination termination = Termination::completed;
};

struct SectionOptions {
    int n_crossings = 200;
    double t_max = 1e4;
    double dt = 1e-3;
    Scheme scheme = Scheme::yoshida4;
    Direction direction = Direction::positive;
    Coordinate plane = Coordinate::p_z;
    double plane_value = 0.0;
    double collapse_width = 1e-2;
    double escape_width = 1e3;
};

/// Surface-of-section crossings of each seed orbit (2 DOF systems). Seeds must
/// share one energy to 1e-8 relative. Output order follows the seed order.
std::vector<OrbitSection> poincare(const HamSystem& sys, std::span<const PhaseState> seeds,
                                   const SectionOptions& opt, int workers = 1);

struct SeedWindow {
    double q_rho_lo = 0.0;
    double q_rho_hi = 0.0;
    double p_rho_lo = 0.0;
    double p_rho_hi = 0.0;
};

/// Grid over (q_rho, p_rho) with p_z = 0 and q_z solving H = energy; every real
/// q_z solution becomes a seed. May return fewer seeds than grid points.
std::vector<PhaseState> seed_on_section(const HamSystem& sys, double energy, const SeedWindow& window,
                                        int n_q, int n_p);

/// Bounding box of the energy shell on the p_z = 0 section.
std::optional<SeedWindow> section_window(const HamSystem& sys, double energy);

/// Seed window of the potential well around the dipolar ground state: q_rho from
/// the well's inner edge (never past the saddle's q_rho) to its outer edge at
/// this energy, p_rho up to the shell maximum. Empty at or below the ground state.
std::optional<SeedWindow> well_window(const DipolarScaled& prm, double energy);

/// Turning point (p = 0) at the given energy just inside the well, displaced from
/// the saddle along its unstable direction. Requires energy below the saddle.
PhaseState near_saddle_seed(const DipolarScaled& prm, double energy);

// ----- Lyapunov exponent and orbit classes --------------------------------

struct MleOptions {
    double t_end = 1e3;
    double dt = 1e-3;
    double renorm_interval = 1.0;
    double separation = 1e-8;     ///< in natural phase-space units
    Scheme scheme = Scheme::verlet;
    std::optional<std::array<double, 4>> direction;  ///< (dq, dp) in natural units
    double collapse_width = 1e-2;
    double escape_width = 1e3;
};

struct MleResult {
    std::vector<double> times;
    std::vector<double> running;    ///< running average, per time unit
    double estimate = 0.0;          ///< running average at the last renormalization
    double last_quarter_mean = 0.0;
    Termination termination = Termination::completed;
    bool partial = false;
};

/// Benettin two-trajectory estimate of the maximal Lyapunov exponent.
MleResult mle(const HamSystem& sys, const PhaseState& s0, const MleOptions& opt);

enum class OrbitClass { bound_regular, bound_chaotic, collapse, escape };

const char* to_string(OrbitClass c);

/// collapse/escape from the termination reason, else regular iff the MLE
/// (last-quarter mean, 1/time unit) is below the threshold.
OrbitClass classify(Termination termination, const MleResult& mle, double threshold);

/// Smallest linearization frequency at the dipolar ground state, 1/time unit.
double ground_state_frequency(const DipolarScaled& prm);

}  // namespace lrbec::dyn
