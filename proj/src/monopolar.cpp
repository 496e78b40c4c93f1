#include "lrbec/monopolar.hpp"

#include <cmath>
#include <numbers>

#include "lrbec/errors.hpp"

namespace lrbec::mono {

namespace {

constexpr double kPi = std::numbers::pi;
// sqrt(3)/sqrt(pi)
const double kLongRange = std::sqrt(3.0 / kPi);
// 3 sqrt(3) / (2 sqrt(pi))
const double kContact = 1.5 * std::sqrt(3.0 / kPi);
constexpr double kCriticalFree = -3.0 * kPi / 8.0;
constexpr double kDegenerateTol = 1e-12;

// d a_stationary / dq, monotonically increasing in q.
double stationary_a_slope(double q, double gamma) {
    return (2.0 * kLongRange * q - 4.5 + 10.0 * gamma * gamma * q * q * q * q) / (3.0 * kContact);
}

// Width at which stationary_a is minimal, i.e. where the two branches merge.
double fold_width(double gamma) {
    if (gamma == 0.0) return 9.0 / (4.0 * kLongRange);
    double lo = 0.0;
    double hi = 9.0 / (4.0 * kLongRange);
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (stationary_a_slope(mid, gamma) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Root of V'(q) in [lo, hi] where the sign is known to change.
double polish_root(double lo, double hi, const Params& prm) {
    double f_lo = force(lo, prm);
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = force(mid, prm);
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    double q = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        const double c = curvature(q, prm);
        if (c == 0.0) break;
        const double step = force(q, prm) / c;
        if (!std::isfinite(step) || q + step <= 0.0) break;
        q += step;
        if (std::abs(step) < 1e-15 * q) break;
    }
    return q;
}

FixedPoint make_point(double q, const Params& prm) {
    FixedPoint fp;
    fp.q_star = q;
    fp.energy = potential(q, prm);
    fp.mu = chemical_potential(q, prm);
    const Stability st = stability(q, prm);
    fp.kind = st.kind;
    fp.eigen = st.eigen;
    return fp;
}

}  // namespace

const char* to_string(Kind k) {
    switch (k) {
        case Kind::elliptic: return "elliptic";
        case Kind::hyperbolic: return "hyperbolic";
        case Kind::degenerate: return "degenerate";
    }
    return "?";
}

double kinetic_energy(double p) { return p * p; }

double contact_term(double q, const Params& prm) { return kContact * prm.a / (q * q * q); }

double long_range_term(double q) { return -kLongRange / q; }

double potential(double q, const Params& prm) {
    return 9.0 / (4.0 * q * q) + contact_term(q, prm) + long_range_term(q) +
           prm.gamma * prm.gamma * q * q;
}

double energy(const State& s, const Params& prm) {
    return kinetic_energy(s.p) + potential(s.q, prm);
}

double force(double q, const Params& prm) {
    const double q2 = q * q;
    const double dv = -4.5 / (q2 * q) - 3.0 * kContact * prm.a / (q2 * q2) + kLongRange / q2 +
                      2.0 * prm.gamma * prm.gamma * q;
    return -dv;
}

double curvature(double q, const Params& prm) {
    const double q2 = q * q;
    return 13.5 / (q2 * q2) + 12.0 * kContact * prm.a / (q2 * q2 * q) - 2.0 * kLongRange / (q2 * q) +
           2.0 * prm.gamma * prm.gamma;
}

double stationary_a(double q, double gamma) {
    const double q2 = q * q;
    return (kLongRange * q2 - 4.5 * q + 2.0 * gamma * gamma * q2 * q2 * q) / (3.0 * kContact);
}

std::vector<FixedPoint> fixed_points(const Params& prm) {
    if (prm.gamma < 0.0 || !std::isfinite(prm.gamma) || !std::isfinite(prm.a))
        throw ConfigError("monopolar parameters must be finite with gamma >= 0");

    std::vector<FixedPoint> out;
    const double a_cr = critical_a(prm.gamma);
    if (std::abs(prm.a - a_cr) < kDegenerateTol) {
        FixedPoint fp = make_point(fold_width(prm.gamma), prm);
        fp.kind = Kind::degenerate;
        fp.eigen = 0.0;
        out.push_back(fp);
        return out;
    }
    if (prm.a < a_cr) return out;

    if (prm.gamma == 0.0) {
        // c q^2 - (9/2) q - 3 k a = 0; small root from the product of roots.
        const double disc = 20.25 + 12.0 * kLongRange * kContact * prm.a;
        const double q_plus = (4.5 + std::sqrt(disc)) / (2.0 * kLongRange);
        const double q_minus = (-3.0 * kContact * prm.a / kLongRange) / q_plus;
        if (q_minus > 0.0) out.push_back(make_point(q_minus, prm));
        out.push_back(make_point(q_plus, prm));
        return out;
    }

    // stationary_a(q) is convex with its minimum at the fold width; each side
    // holds at most one root, bracketed by the fold and a wall.
    const double q_fold = fold_width(prm.gamma);
    if (prm.a < 0.0) {
        double lo = q_fold;
        while (stationary_a(lo, prm.gamma) < prm.a) lo *= 0.5;
        out.push_back(make_point(polish_root(lo, q_fold, prm), prm));
    }
    double hi = q_fold;
    while (stationary_a(hi, prm.gamma) < prm.a) hi *= 2.0;
    out.push_back(make_point(polish_root(q_fold, hi, prm), prm));
    return out;
}

double critical_a(double gamma) {
    if (gamma < 0.0 || !std::isfinite(gamma)) throw ConfigError("gamma must be >= 0");
    if (gamma == 0.0) return kCriticalFree;
    return stationary_a(fold_width(gamma), gamma);
}

Stability stability(double q_star, const Params& prm) {
    const double c = curvature(q_star, prm);
    const double scale = 13.5 / (q_star * q_star * q_star * q_star) + 2.0 * prm.gamma * prm.gamma;
    if (std::abs(c) <= 1e-10 * scale) return {Kind::degenerate, 0.0};
    // J * Hess(H) = [[0, 2], [-V'', 0]]
    if (c > 0.0) return {Kind::elliptic, std::sqrt(2.0 * c)};
    return {Kind::hyperbolic, std::sqrt(-2.0 * c)};
}

double chemical_potential(double q_star, const Params& prm) {
    return potential(q_star, prm) + contact_term(q_star, prm) + long_range_term(q_star);
}

State from_width(const WidthParam& w) {
    if (!(w.a_i > 0.0)) throw ConfigError("Im A must be positive");
    return {std::sqrt(3.0 / (4.0 * w.a_i)), w.a_r * std::sqrt(3.0 / w.a_i)};
}

WidthParam to_width(const State& s) {
    if (!(s.q > 0.0)) throw ConfigError("width q must be positive");
    return {s.p / (2.0 * s.q), 3.0 / (4.0 * s.q * s.q)};
}

}  // namespace lrbec::mono
