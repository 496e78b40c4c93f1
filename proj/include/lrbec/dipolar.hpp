#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "lrbec/units.hpp"

namespace lrbec::dip {

struct State {
    double q_rho = 1.0;
    double q_z = 1.0;
    double p_rho = 0.0;
    double p_z = 0.0;
};

/// Complex widths of psi = exp(i (A_rho rho^2 + A_z z^2 + phase)).
struct WidthParams {
    double a_rho_r = 0.0;
    double a_rho_i = 0.25;
    double a_z_r = 0.0;
    double a_z_i = 0.125;
};

struct Gradient {
    double d_rho = 0.0;
    double d_z = 0.0;
};

using Hessian = std::array<std::array<double, 2>, 2>;

enum class Kind { minimum, saddle, maximum, degenerate };

const char* to_string(Kind k);

struct FixedPoint {
    double q_rho_star = 0.0;
    double q_z_star = 0.0;
    double energy = 0.0;
    double mu = 0.0;
    Kind kind = Kind::degenerate;
    /// Spectrum of the linearized flow J * Hess(H), sorted by (real, imag).
    std::array<std::complex<double>, 4> eigenvalues{};
};

struct FixedPointSet {
    std::vector<FixedPoint> points;  ///< ordered by increasing energy
    std::vector<std::string> warnings;
};

struct Spectrum {
    std::array<std::complex<double>, 4> eigenvalues{};
    int elliptic_pairs = 0;
    int hyperbolic_pairs = 0;
    bool marginal = false;  ///< some eigenvalue has |Re| and |Im| below 1e-8 (scaled)
};

/// Natural length of the trap, 1/sqrt(N^2 gamma_bar); fixed points live near it.
double trap_length(const DipolarScaled& prm);

/// Natural time of the trap, 1/(2 N^2 gamma_bar), the inverse mean trap frequency.
double trap_time(const DipolarScaled& prm);

/// Eccentricity parameter t = q_rho^2 / (2 q_z^2) - 1; zero for a spherical density.
double eccentricity(double q_rho, double q_z);

/// Shape factor F(t) of the dipolar mean-field term, D = F(t) / (2 sqrt(2 pi) q_rho^2 q_z),
/// and its derivative. Oblate (t > 0) uses arctan, prolate (t < 0) artanh, and
/// |t| < 1e-4 a series through t^4.
double shape_factor(double t);
double shape_factor_derivative(double t);

/// Mean-field dipole-dipole energy of the Gaussian; zero for spherical shapes.
double anisotropy_term(double q_rho, double q_z);
Gradient anisotropy_gradient(double q_rho, double q_z);

double contact_term(double q_rho, double q_z, const DipolarScaled& prm);

double potential(double q_rho, double q_z, const DipolarScaled& prm);
double energy(const State& s, const DipolarScaled& prm);
Gradient gradient(double q_rho, double q_z, const DipolarScaled& prm);

/// Central differences of the analytic gradient.
Hessian hessian(double q_rho, double q_z, const DipolarScaled& prm);

/// Gradient norm made dimensionless by q * dV/dq over the size of the potential terms.
double scaled_gradient_norm(double q_rho, double q_z, const DipolarScaled& prm);

struct SearchOptions {
    int seeds_per_axis = 16;
    double window_lo = 1e-2;  ///< in units of trap_length
    double window_hi = 1e2;
    int max_iterations = 200;
    double tolerance = 1e-10;  ///< on scaled_gradient_norm
    double dedup = 1e-6;       ///< relative distance
};

/// Multi-start damped Newton on the gradient. Empty below the fold.
FixedPointSet fixed_points(const DipolarScaled& prm, const SearchOptions& opt = {});

Kind classify_hessian(const Hessian& h);

/// Eigenvalues of the 4x4 linearized Hamiltonian flow at a critical point.
Spectrum stability(double q_rho, double q_z, const DipolarScaled& prm);

/// mu = E + contact + dipolar term at the fixed point.
double chemical_potential(double q_rho, double q_z, const DipolarScaled& prm);

/// Largest a/a_d at which no fixed point exists, by bisection on the fixed-point
/// count between a_lo (no points) and a_hi (two points).
double critical_a(DipolarScaled prm, double a_lo, double a_hi, double tol = 1e-9);

State from_width(const WidthParams& w);
WidthParams to_width(const State& s);

}  // namespace lrbec::dip
