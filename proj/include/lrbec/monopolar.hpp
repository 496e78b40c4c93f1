#pragma once

#include <vector>

namespace lrbec::mono {

/// Scaled parameters of the 1/r gas: a = N^2 a/a_u, gamma = gamma/N^2.
struct Params {
    double a = 0.0;
    double gamma = 0.0;
};

/// Canonical coordinates of the isotropic Gaussian: q = sqrt(<r^2>) and its momentum.
struct State {
    double q = 1.0;
    double p = 0.0;
};

/// Complex width A = a_r + i a_i of psi = exp(i (A r^2 + phase)).
struct WidthParam {
    double a_r = 0.0;
    double a_i = 0.75;
};

enum class Kind { elliptic, hyperbolic, degenerate };

const char* to_string(Kind k);

struct FixedPoint {
    double q_star = 0.0;
    double energy = 0.0;
    double mu = 0.0;
    Kind kind = Kind::degenerate;
    /// Oscillation frequency (elliptic), growth rate (hyperbolic), zero (degenerate).
    double eigen = 0.0;
};

struct Stability {
    Kind kind = Kind::degenerate;
    double eigen = 0.0;
};

// H(q, p) = p^2 + V(q),
// V(q) = 9/(4q^2) + 3 sqrt(3) a / (2 sqrt(pi) q^3) - sqrt(3)/(sqrt(pi) q) + gamma^2 q^2.
// The trap term is gamma^2 <r^2> for the Gaussian, which is gamma^2 q^2 by the
// definition of q.

double kinetic_energy(double p);
double contact_term(double q, const Params& prm);
double long_range_term(double q);
double potential(double q, const Params& prm);
double energy(const State& s, const Params& prm);

/// -dV/dq.
double force(double q, const Params& prm);

/// d^2V/dq^2.
double curvature(double q, const Params& prm);

/// Scattering length at which q is a stationary point of V; V'(q) = 0 is linear in a.
double stationary_a(double q, double gamma);

/// Fixed points ordered by increasing q. At gamma = 0 the count is 0 below
/// -3 pi/8, one degenerate point at it, two in between and one for a >= 0.
std::vector<FixedPoint> fixed_points(const Params& prm);

/// Fold location in a (the tangent bifurcation). Exactly -3 pi / 8 at gamma = 0.
double critical_a(double gamma);

/// Linearization of Hamilton's equations at q_star; eigenvalues are +-sqrt(-2 V'').
Stability stability(double q_star, const Params& prm);

/// Chemical potential of the stationary Gaussian: interaction terms count twice
/// relative to their weight in the energy functional.
double chemical_potential(double q_star, const Params& prm);

State from_width(const WidthParam& w);
WidthParam to_width(const State& s);

}  // namespace lrbec::mono
