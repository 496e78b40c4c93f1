#pragma once

#include <cstdint>

namespace lrbec {

// Natural units. Monopolar (1/r) gas: a_u = hbar^2/(m u), E_u = hbar^2/(2 m a_u^2),
// time hbar/E_u. Dipolar gas: a_d = mu0 mu^2 m/(2 pi hbar^2), E_d = hbar^2/(2 m a_d^2),
// time hbar/E_d. The physical constants cancel in the scaled equations and are
// never runtime data.

struct MonopolarPhysical {
    std::uint64_t n_particles = 1;
    double a_over_au = 0.0;  ///< scattering length in units of a_u
    double gamma = 0.0;      ///< trap frequency hbar*omega0/(2 E_u)
};

/// The two parameters the 1/r Gross-Pitaevskii solutions depend on.
struct MonopolarScaled {
    double gamma_scaled = 0.0;  ///< gamma / N^2
    double a_scaled = 0.0;      ///< N^2 a / a_u
};

struct DipolarPhysical {
    std::uint64_t n_particles = 1;
    double a_over_ad = 0.0;
    double gamma_rho = 1.0;
    double gamma_z = 1.0;
};

/// The three parameters the dipolar solutions depend on.
struct DipolarScaled {
    double gamma_bar_scaled = 1.0;  ///< N^2 * gamma_rho^(2/3) gamma_z^(1/3)
    double lambda = 1.0;            ///< aspect ratio gamma_z / gamma_rho
    double a_scaled = 0.0;          ///< a / a_d

    /// Trap frequencies of the N = 1 problem carrying these scaled parameters.
    [[nodiscard]] double gamma_rho() const;
    [[nodiscard]] double gamma_z() const;
};

enum class GasKind { monopolar, dipolar };

void validate(const MonopolarPhysical& p);
void validate(const MonopolarScaled& p);
void validate(const DipolarPhysical& p);
void validate(const DipolarScaled& p);

MonopolarScaled to_scaled(const MonopolarPhysical& p);
DipolarScaled to_scaled(const DipolarPhysical& p);

/// Mean-field energy of the N-particle system from the scaled (N = 1) energy:
/// N^3 e (units of E_u) for the 1/r gas, e / N (units of E_d) for the dipolar gas.
double unscale_energy(double e_scaled, std::uint64_t n, GasKind kind);

/// Inverse of unscale_energy.
double scale_energy(double e_physical, std::uint64_t n, GasKind kind);

}  // namespace lrbec
