#include "lrbec/units.hpp"

#include <cmath>
#include <string>

#include "lrbec/errors.hpp"

namespace lrbec {

namespace {

double n_squared(std::uint64_t n) {
    const auto nd = static_cast<double>(n);
    return nd * nd;
}

// Cube root that commutes exactly with scaling by 2^(3k): the binary exponent is
// split off in multiples of three before the library cbrt sees the mantissa.
double exact_cbrt(double x) {
    int e = 0;
    const double m = std::frexp(x, &e);
    int r = e % 3;
    if (r < 0) r += 3;
    return std::ldexp(std::cbrt(std::ldexp(m, r)), (e - r) / 3);
}

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

double DipolarScaled::gamma_rho() const { return gamma_bar_scaled / exact_cbrt(lambda); }

double DipolarScaled::gamma_z() const {
    const double l3 = exact_cbrt(lambda);
    return gamma_bar_scaled * l3 * l3;
}

void validate(const MonopolarPhysical& p) {
    require(p.n_particles >= 1, "n_particles must be >= 1");
    require(std::isfinite(p.a_over_au), "scattering length must be finite");
    require(std::isfinite(p.gamma) && p.gamma >= 0.0, "gamma must be finite and >= 0");
}

void validate(const MonopolarScaled& p) {
    require(std::isfinite(p.a_scaled), "scattering length must be finite");
    require(std::isfinite(p.gamma_scaled) && p.gamma_scaled >= 0.0,
            "scaled gamma must be finite and >= 0");
}

void validate(const DipolarPhysical& p) {
    require(p.n_particles >= 1, "n_particles must be >= 1");
    require(std::isfinite(p.a_over_ad), "scattering length must be finite");
    require(std::isfinite(p.gamma_rho) && p.gamma_rho > 0.0, "gamma_rho must be > 0");
    require(std::isfinite(p.gamma_z) && p.gamma_z > 0.0, "gamma_z must be > 0");
}

void validate(const DipolarScaled& p) {
    require(std::isfinite(p.a_scaled), "scattering length must be finite");
    require(std::isfinite(p.gamma_bar_scaled) && p.gamma_bar_scaled > 0.0,
            "scaled mean trap frequency must be > 0");
    require(std::isfinite(p.lambda) && p.lambda > 0.0, "aspect ratio must be > 0");
}

MonopolarScaled to_scaled(const MonopolarPhysical& p) {
    validate(p);
    const double n2 = n_squared(p.n_particles);
    return {p.gamma / n2, n2 * p.a_over_au};
}

DipolarScaled to_scaled(const DipolarPhysical& p) {
    validate(p);
    const double gamma_bar = exact_cbrt(p.gamma_rho * p.gamma_rho * p.gamma_z);
    return {n_squared(p.n_particles) * gamma_bar, p.gamma_z / p.gamma_rho, p.a_over_ad};
}

double unscale_energy(double e_scaled, std::uint64_t n, GasKind kind) {
    require(n >= 1, "particle number must be >= 1");
    const auto nd = static_cast<double>(n);
    if (kind == GasKind::monopolar) return nd * nd * nd * e_scaled;
    return e_scaled / nd;
}

double scale_energy(double e_physical, std::uint64_t n, GasKind kind) {
    require(n >= 1, "particle number must be >= 1");
    const auto nd = static_cast<double>(n);
    if (kind == GasKind::monopolar) return e_physical / (nd * nd * nd);
    return e_physical * nd;
}

}  // namespace lrbec
