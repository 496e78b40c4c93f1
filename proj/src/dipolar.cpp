#include "lrbec/dipolar.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "lrbec/errors.hpp"

namespace lrbec::dip {

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);
constexpr double kSeriesRegion = 1e-4;

// g(t) = arctan(sqrt t)/sqrt t, continued analytically to t < 0.
double arctan_ratio(double t) {
    if (t > 0.0) {
        const double s = std::sqrt(t);
        return std::atan(s) / s;
    }
    const double s = std::sqrt(-t);
    return std::atanh(s) / s;
}

double prefactor(double q_rho, double q_z) { return 1.0 / (2.0 * kSqrt2Pi * q_rho * q_rho * q_z); }

double potential_scale(double q_rho, double q_z, const DipolarScaled& prm) {
    const double gr = prm.gamma_rho();
    const double gz = prm.gamma_z();
    return 1.0 / (2.0 * q_rho * q_rho) + 2.0 * gr * gr * q_rho * q_rho +
           std::abs(contact_term(q_rho, q_z, prm)) + 1.0 / (8.0 * q_z * q_z) +
           2.0 * gz * gz * q_z * q_z + std::abs(anisotropy_term(q_rho, q_z));
}

struct NewtonResult {
    bool converged = false;
    double q_rho = 0.0;
    double q_z = 0.0;
};

NewtonResult newton(double q_rho, double q_z, const DipolarScaled& prm, const SearchOptions& opt) {
    double merit = scaled_gradient_norm(q_rho, q_z, prm);
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (merit < opt.tolerance) return {true, q_rho, q_z};
        const Gradient g = gradient(q_rho, q_z, prm);
        const Hessian h = hessian(q_rho, q_z, prm);
        const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if (det == 0.0 || !std::isfinite(det)) return {};
        double dr = -(h[1][1] * g.d_rho - h[0][1] * g.d_z) / det;
        double dz = -(-h[1][0] * g.d_rho + h[0][0] * g.d_z) / det;
        double next_r = q_rho + dr;
        double next_z = q_z + dz;
        if (!(next_r > 0.0 && next_z > 0.0)) return {};
        double next_merit = scaled_gradient_norm(next_r, next_z, prm);
        int halvings = 0;
        while (!(next_merit < merit) && halvings < 30) {
            dr *= 0.5;
            dz *= 0.5;
            next_r = q_rho + dr;
            next_z = q_z + dz;
            next_merit = scaled_gradient_norm(next_r, next_z, prm);
            ++halvings;
        }
        if (!(next_merit < merit)) return merit < opt.tolerance ? NewtonResult{true, q_rho, q_z} : NewtonResult{};
        q_rho = next_r;
        q_z = next_z;
        merit = next_merit;
    }
    if (merit < opt.tolerance) return {true, q_rho, q_z};
    return {};
}

}  // namespace

const char* to_string(Kind k) {
    switch (k) {
        case Kind::minimum: return "minimum";
        case Kind::saddle: return "saddle";
        case Kind::maximum: return "maximum";
        case Kind::degenerate: return "degenerate";
    }
    return "?";
}

double trap_length(const DipolarScaled& prm) { return 1.0 / std::sqrt(prm.gamma_bar_scaled); }

double trap_time(const DipolarScaled& prm) { return 1.0 / (2.0 * prm.gamma_bar_scaled); }

double eccentricity(double q_rho, double q_z) { return q_rho * q_rho / (2.0 * q_z * q_z) - 1.0; }

double shape_factor(double t) {
    if (std::abs(t) < kSeriesRegion) {
        // sum_{n>=2} (-1)^n t^(n-1) / (4 n^2 - 1)
        return t * (1.0 / 15.0 + t * (-1.0 / 35.0 + t * (1.0 / 63.0 + t * (-1.0 / 99.0))));
    }
    const double g = arctan_ratio(t);
    return (3.0 + 2.0 * t - 3.0 * (1.0 + t) * g) / (6.0 * t);
}

double shape_factor_derivative(double t) {
    if (std::abs(t) < kSeriesRegion) {
        return 1.0 / 15.0 + t * (-2.0 / 35.0 + t * (3.0 / 63.0 + t * (-4.0 / 99.0)));
    }
    const double g = arctan_ratio(t);
    const double num = 3.0 + 2.0 * t - 3.0 * (1.0 + t) * g;
    // (1+t) g' = (1 - (1+t) g) / (2t)
    const double dnum = 2.0 - 3.0 * g - 3.0 * (1.0 - (1.0 + t) * g) / (2.0 * t);
    return (dnum * t - num) / (6.0 * t * t);
}

double anisotropy_term(double q_rho, double q_z) {
    return shape_factor(eccentricity(q_rho, q_z)) * prefactor(q_rho, q_z);
}

Gradient anisotropy_gradient(double q_rho, double q_z) {
    const double t = eccentricity(q_rho, q_z);
    const double f = shape_factor(t);
    const double df = shape_factor_derivative(t);
    const double pre = prefactor(q_rho, q_z);
    const double dt_rho = q_rho / (q_z * q_z);
    const double dt_z = -q_rho * q_rho / (q_z * q_z * q_z);
    return {pre * (df * dt_rho - 2.0 * f / q_rho), pre * (df * dt_z - f / q_z)};
}

double contact_term(double q_rho, double q_z, const DipolarScaled& prm) {
    return prm.a_scaled / (2.0 * kSqrt2Pi * q_rho * q_rho * q_z);
}

double potential(double q_rho, double q_z, const DipolarScaled& prm) {
    const double gr = prm.gamma_rho();
    const double gz = prm.gamma_z();
    const double r2 = q_rho * q_rho;
    const double z2 = q_z * q_z;
    return 1.0 / (2.0 * r2) + 2.0 * gr * gr * r2 + contact_term(q_rho, q_z, prm) + 1.0 / (8.0 * z2) +
           2.0 * gz * gz * z2 + anisotropy_term(q_rho, q_z);
}

double energy(const State& s, const DipolarScaled& prm) {
    return 0.5 * (s.p_rho * s.p_rho + s.p_z * s.p_z) + potential(s.q_rho, s.q_z, prm);
}

Gradient gradient(double q_rho, double q_z, const DipolarScaled& prm) {
    const double gr = prm.gamma_rho();
    const double gz = prm.gamma_z();
    const double c = contact_term(q_rho, q_z, prm);
    const Gradient d = anisotropy_gradient(q_rho, q_z);
    return {-1.0 / (q_rho * q_rho * q_rho) + 4.0 * gr * gr * q_rho - 2.0 * c / q_rho + d.d_rho,
            -1.0 / (4.0 * q_z * q_z * q_z) + 4.0 * gz * gz * q_z - c / q_z + d.d_z};
}

Hessian hessian(double q_rho, double q_z, const DipolarScaled& prm) {
    const double hr = 1e-5 * q_rho;
    const double hz = 1e-5 * q_z;
    const Gradient rp = gradient(q_rho + hr, q_z, prm);
    const Gradient rm = gradient(q_rho - hr, q_z, prm);
    const Gradient zp = gradient(q_rho, q_z + hz, prm);
    const Gradient zm = gradient(q_rho, q_z - hz, prm);
    const double hrr = (rp.d_rho - rm.d_rho) / (2.0 * hr);
    const double hzz = (zp.d_z - zm.d_z) / (2.0 * hz);
    const double hrz = 0.5 * ((rp.d_z - rm.d_z) / (2.0 * hr) + (zp.d_rho - zm.d_rho) / (2.0 * hz));
    return {{{hrr, hrz}, {hrz, hzz}}};
}

double scaled_gradient_norm(double q_rho, double q_z, const DipolarScaled& prm) {
    const Gradient g = gradient(q_rho, q_z, prm);
    return std::hypot(q_rho * g.d_rho, q_z * g.d_z) / potential_scale(q_rho, q_z, prm);
}

Kind classify_hessian(const Hessian& h) {
    const double tr = h[0][0] + h[1][1];
    const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    const double scale = std::abs(h[0][0]) + std::abs(h[1][1]) + 2.0 * std::abs(h[0][1]);
    if (std::abs(det) <= 1e-12 * scale * scale) return Kind::degenerate;
    if (det < 0.0) return Kind::saddle;
    return tr > 0.0 ? Kind::minimum : Kind::maximum;
}

Spectrum stability(double q_rho, double q_z, const DipolarScaled& prm) {
    const Hessian h = hessian(q_rho, q_z, prm);
    // Coordinates (q_rho, q_z, p_rho, p_z); Hess(H) = diag(Hess V, I).
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m(0, 2) = 1.0;
    m(1, 3) = 1.0;
    m(2, 0) = -h[0][0];
    m(2, 1) = -h[0][1];
    m(3, 0) = -h[1][0];
    m(3, 1) = -h[1][1];
    Eigen::EigenSolver<Eigen::Matrix4d> solver(m, false);
    Spectrum s;
    const double freq_scale = std::sqrt(std::abs(h[0][0]) + std::abs(h[1][1]));
    for (int i = 0; i < 4; ++i) s.eigenvalues[i] = solver.eigenvalues()[i];
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](auto x, auto y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    int real_count = 0;
    int imag_count = 0;
    for (const auto& ev : s.eigenvalues) {
        const double re = std::abs(ev.real()) / freq_scale;
        const double im = std::abs(ev.imag()) / freq_scale;
        if (re < 1e-8 && im < 1e-8) s.marginal = true;
        else if (re > im) ++real_count;
        else ++imag_count;
    }
    s.hyperbolic_pairs = real_count / 2;
    s.elliptic_pairs = imag_count / 2;
    return s;
}

double chemical_potential(double q_rho, double q_z, const DipolarScaled& prm) {
    return potential(q_rho, q_z, prm) + contact_term(q_rho, q_z, prm) + anisotropy_term(q_rho, q_z);
}

FixedPointSet fixed_points(const DipolarScaled& prm, const SearchOptions& opt) {
    validate(prm);
    FixedPointSet out;
    const double len = trap_length(prm);
    const int n = opt.seeds_per_axis;
    const double log_lo = std::log(opt.window_lo * len);
    const double log_hi = std::log(opt.window_hi * len);
    std::vector<std::pair<double, double>> found;
    bool near_duplicate = false;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double qr = std::exp(log_lo + (log_hi - log_lo) * i / (n - 1));
            const double qz = std::exp(log_lo + (log_hi - log_lo) * j / (n - 1));
            const NewtonResult r = newton(qr, qz, prm, opt);
            if (!r.converged) continue;
            bool duplicate = false;
            for (const auto& [fr, fz] : found) {
                const double dist = std::hypot(r.q_rho - fr, r.q_z - fz) / std::hypot(fr, fz);
                if (dist < opt.dedup) {
                    duplicate = true;
                    break;
                }
                if (dist < 10.0 * opt.dedup) near_duplicate = true;
            }
            if (!duplicate) found.emplace_back(r.q_rho, r.q_z);
        }
    }
    if (near_duplicate)
        out.warnings.emplace_back("distinct fixed points closer than 10x the dedup tolerance");
    for (const auto& [qr, qz] : found) {
        FixedPoint fp;
        fp.q_rho_star = qr;
        fp.q_z_star = qz;
        fp.energy = potential(qr, qz, prm);
        fp.mu = chemical_potential(qr, qz, prm);
        fp.kind = classify_hessian(hessian(qr, qz, prm));
        fp.eigenvalues = stability(qr, qz, prm).eigenvalues;
        out.points.push_back(fp);
    }
    std::sort(out.points.begin(), out.points.end(),
              [](const FixedPoint& x, const FixedPoint& y) { return x.energy < y.energy; });
    return out;
}

double critical_a(DipolarScaled prm, double a_lo, double a_hi, double tol) {
    auto count = [&](double a) {
        prm.a_scaled = a;
        return fixed_points(prm).points.size();
    };
    if (count(a_lo) != 0) throw DomainError("lower bracket of the fold scan has fixed points");
    if (count(a_hi) == 0) throw DomainError("upper bracket of the fold scan has no fixed points");
    while (a_hi - a_lo > tol) {
        const double mid = 0.5 * (a_lo + a_hi);
        (count(mid) == 0 ? a_lo : a_hi) = mid;
    }
    return a_lo;
}

State from_width(const WidthParams& w) {
    if (!(w.a_rho_i > 0.0 && w.a_z_i > 0.0)) throw ConfigError("Im A_rho and Im A_z must be positive");
    State s;
    s.q_rho = 0.5 / std::sqrt(w.a_rho_i);
    s.q_z = 1.0 / std::sqrt(8.0 * w.a_z_i);
    s.p_rho = 4.0 * s.q_rho * w.a_rho_r;
    s.p_z = 4.0 * s.q_z * w.a_z_r;
    return s;
}

WidthParams to_width(const State& s) {
    if (!(s.q_rho > 0.0 && s.q_z > 0.0)) throw ConfigError("widths must be positive");
    return {s.p_rho / (4.0 * s.q_rho), 1.0 / (4.0 * s.q_rho * s.q_rho), s.p_z / (4.0 * s.q_z),
            1.0 / (8.0 * s.q_z * s.q_z)};
}

}  // namespace lrbec::dip
