#include "lrbec/radial_gpe.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <optional>

#include "lrbec/errors.hpp"
#include "lrbec/monopolar.hpp"

namespace lrbec::gpe {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFourPi = 4.0 * kPi;
constexpr double kEightPi = 8.0 * kPi;

// FFTW planning is not thread-safe.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

double weighted_sum_sq(const RadialState& s) {
    double acc = 0.0;
    for (const cplx& v : s.u) acc += std::norm(v);
    return acc;
}

double contact_strength(const Params& prm) { return prm.on.contact ? kEightPi * prm.a : 0.0; }

// Variational rms width that seeds the requested branch, if it exists.
std::optional<double> seed_width(const Params& prm, Branch branch) {
    if (!prm.on.long_range) {
        if (prm.gamma <= 0.0) return std::nullopt;
        return std::sqrt(1.5 / prm.gamma);  // oscillator orbital, <r^2> = 3/(2 gamma)
    }
    const mono::Params mp{prm.on.contact ? prm.a : 0.0, prm.gamma};
    const auto fps = mono::fixed_points(mp);
    const mono::Kind want = branch == Branch::stable ? mono::Kind::elliptic : mono::Kind::hyperbolic;
    std::optional<double> q;
    for (const auto& fp : fps)
        if (fp.kind == want || fp.kind == mono::Kind::degenerate) q = fp.q_star;
    return q;
}

double width_to_k(double q) { return std::sqrt(1.5) / q; }

// Outward march of the discretized u and w = r U equations from u_0 = w_0 = 0,
// u_1 = s, w_1 = h U0. For given (s, U0) the eigenvalue is fixed by bisection on
// the node count: the orbital must stay positive and decay.
class OutwardMarch {
public:
    OutwardMarch(const Params& prm, const RadialGrid& grid) : prm_(prm), grid_(grid) {}

    struct Result {
        double mu = 0.0;
        int cut = 0;  // radial index where u is truncated to zero
        std::vector<double> u, w;  // radial index j = 0..cut
        double norm = 0.0;
        double w_slope = 0.0;  // vanishes when U(0) is consistent with the density
    };

    // -1: u turned upward (mu below the eigenvalue); +1: u crossed zero or the
    // march reached r_max still decaying (mu at or above).
    int classify(double mu, double s, double u0, Result* keep) const {
        const double h = grid_.h();
        const double h2 = h * h;
        const double g = contact_strength(prm_);
        const double g2 = prm_.gamma * prm_.gamma;
        const int jmax = grid_.n + 1;
        double up = 0.0, uc = s, wp = 0.0, wc = prm_.on.long_range ? u0 * h : 0.0;
        bool falling = false;
        if (keep) {
            keep->u.assign(1, 0.0);
            keep->w.assign(1, 0.0);
        }
        int outcome = +1;
        int j = 1;
        for (; j < jmax; ++j) {
            if (keep) {
                keep->u.push_back(uc);
                keep->w.push_back(wc);
            }
            const double r = j * h;
            const double v = g2 * r * r + g * uc * uc / (r * r) + wc / r;
            const double un = 2.0 * uc - up + h2 * (v - mu) * uc;
            const double wn = prm_.on.long_range ? 2.0 * wc - wp + h2 * kEightPi * uc * uc / r : 0.0;
            if (un <= 0.0) break;
            if (un < uc) {
                falling = true;
            } else if (falling) {
                outcome = -1;
                break;
            }
            up = uc;
            uc = un;
            wp = wc;
            wc = wn;
        }
        if (keep) keep->cut = j + 1;
        return outcome;
    }

    std::optional<Result> solve(double s, double u0, double mu_guess) const {
        double lo = mu_guess, hi = mu_guess;
        double step = std::max(0.05, 0.1 * std::abs(mu_guess));
        for (int i = 0; classify(lo, s, u0, nullptr) != -1; ++i) {
            if (i > 80) return std::nullopt;
            lo -= step;
            step *= 2.0;
        }
        step = std::max(0.05, 0.1 * std::abs(mu_guess));
        for (int i = 0; classify(hi, s, u0, nullptr) != +1; ++i) {
            if (i > 80) return std::nullopt;
            hi += step;
            step *= 2.0;
        }
        for (int i = 0; i < 200 && hi - lo > 4e-16 * std::max(1.0, std::abs(lo)); ++i) {
            const double mid = 0.5 * (lo + hi);
            (classify(mid, s, u0, nullptr) == -1 ? lo : hi) = mid;
        }
        Result r;
        classify(lo, s, u0, &r);
        r.mu = lo;
        // Truncate at the tail minimum and close the far field.
        r.cut = std::min<int>(r.cut, static_cast<int>(r.u.size()) - 1);
        r.u.resize(r.cut + 1);
        r.w.resize(r.cut + 1);
        r.u[r.cut] = 0.0;
        double sum = 0.0;
        for (double x : r.u) sum += x * x;
        r.norm = kFourPi * grid_.h() * sum;
        r.w_slope = (r.w[r.cut - 1] - r.w[r.cut - 2]) / grid_.h();
        return r;
    }

private:
    const Params& prm_;
    RadialGrid grid_;
};

// Newton on the full discretized system in (u_i, w_i, mu) with the norm
// constraint. The (u, w) block is banded when interleaved; mu enters through a
// bordered solve. Returns the final residual of the u equations.
double polish(std::vector<double>& u, std::vector<double>& w, double& mu, const Params& prm,
              const RadialGrid& grid, int max_iter) {
    const int n = grid.n;
    const double h = grid.h();
    const double h2 = h * h;
    const double g = contact_strength(prm);
    const double g2 = prm.gamma * prm.gamma;
    const bool lr = prm.on.long_range;
    const double w_outer = lr ? -2.0 : 0.0;

    struct Residual {
        Eigen::VectorXd a;  // interleaved (u eq, w eq)
        double norm_eq = 0.0;
        double u_part = 0.0;  // || R_u || in the d^3r measure
        double merit = 0.0;
    };
    auto residuals = [&](const std::vector<double>& uu, const std::vector<double>& ww, double m) {
        Residual r;
        r.a.resize(2 * n);
        double sum = 0.0;
        double usq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double ri = grid.r(i);
            const double ul = i > 0 ? uu[i - 1] : 0.0;
            const double ur = i + 1 < n ? uu[i + 1] : 0.0;
            const double v = g2 * ri * ri + g * uu[i] * uu[i] / (ri * ri) + ww[i] / ri;
            r.a[2 * i] = (2.0 * uu[i] - ul - ur) / h2 + (v - m) * uu[i];
            if (lr) {
                const double wl = i > 0 ? ww[i - 1] : 0.0;
                const double wr = i + 1 < n ? ww[i + 1] : w_outer;
                r.a[2 * i + 1] = (wl - 2.0 * ww[i] + wr) / h2 - kEightPi * uu[i] * uu[i] / ri;
            } else {
                r.a[2 * i + 1] = ww[i];
            }
            sum += uu[i] * uu[i];
            usq += r.a[2 * i] * r.a[2 * i];
        }
        r.norm_eq = kFourPi * h * sum - 1.0;
        r.u_part = std::sqrt(kFourPi * h * usq);
        r.merit = std::sqrt(r.a.squaredNorm() * h2 * h2 + r.norm_eq * r.norm_eq);
        return r;
    };

    Residual res = residuals(u, w, mu);
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(8 * n));
    Eigen::VectorXd border(2 * n), cvec(2 * n);
    for (int it = 0; it < max_iter; ++it) {
        if (res.u_part < 1e-11 && std::abs(res.norm_eq) < 1e-13) break;
        trip.clear();
        border.setZero();
        cvec.setZero();
        for (int i = 0; i < n; ++i) {
            const double ri = grid.r(i);
            const int ru = 2 * i;
            const int rw = 2 * i + 1;
            trip.emplace_back(ru, ru, 2.0 / h2 + g2 * ri * ri + 3.0 * g * u[i] * u[i] / (ri * ri) + w[i] / ri - mu);
            if (i > 0) trip.emplace_back(ru, ru - 2, -1.0 / h2);
            if (i + 1 < n) trip.emplace_back(ru, ru + 2, -1.0 / h2);
            border[ru] = -u[i];
            cvec[ru] = 2.0 * kFourPi * h * u[i];
            if (lr) {
                trip.emplace_back(ru, rw, u[i] / ri);
                trip.emplace_back(rw, rw, -2.0 / h2);
                if (i > 0) trip.emplace_back(rw, rw - 2, 1.0 / h2);
                if (i + 1 < n) trip.emplace_back(rw, rw + 2, 1.0 / h2);
                trip.emplace_back(rw, ru, -2.0 * kEightPi * u[i] / ri);
            } else {
                trip.emplace_back(rw, rw, 1.0);
            }
        }
        Eigen::SparseMatrix<double> jac(2 * n, 2 * n);
        jac.setFromTriplets(trip.begin(), trip.end());
        if (it == 0) lu.analyzePattern(jac);
        lu.factorize(jac);
        if (lu.info() != Eigen::Success) break;
        const Eigen::VectorXd y = lu.solve(-res.a);
        const Eigen::VectorXd z = lu.solve(border);
        const double denom = cvec.dot(z);
        if (denom == 0.0 || !y.allFinite() || !z.allFinite()) break;
        const double dmu = (cvec.dot(y) + res.norm_eq) / denom;
        const Eigen::VectorXd dx = y - z * dmu;
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            std::vector<double> un(u), wn(w);
            for (int i = 0; i < n; ++i) {
                un[i] += lambda * dx[2 * i];
                wn[i] += lambda * dx[2 * i + 1];
            }
            const double mn = mu + lambda * dmu;
            Residual rn = residuals(un, wn, mn);
            if (std::isfinite(rn.merit) && rn.merit < res.merit) {
                u.swap(un);
                w.swap(wn);
                mu = mn;
                res = std::move(rn);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    return res.u_part;
}

// Nodeless eigenfunction of -u'' + v u = mu u (u_0 = 0) by bisection on the node
// count of the outward march; u is cut at the tail minimum and normalized.
struct FrozenGuess {
    double mu = 0.0;
    std::vector<double> u;
    int cut = 0;  // radial index of the tail minimum
};

FrozenGuess frozen_ground(const std::vector<double>& v, const RadialGrid& grid) {
    const int n = grid.n;
    const double h2 = grid.h() * grid.h();
    auto march = [&](double mu, std::vector<double>* keep) {
        double prev = 0.0;
        double cur = 1.0;
        int nodes = 0;
        if (keep) keep->assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            if (keep) (*keep)[i] = cur;
            const double next = 2.0 * cur - prev + h2 * (v[i] - mu) * cur;
            if ((next < 0.0) != (cur < 0.0)) ++nodes;
            prev = cur;
            cur = next;
            if (std::abs(cur) > 1e150) {
                if (keep) return nodes;
                prev *= 1e-150;
                cur *= 1e-150;
            }
        }
        return nodes;
    };
    double lo = *std::min_element(v.begin(), v.end());
    double hi = lo + 1.0;
    for (int i = 0; i < 200 && march(hi, nullptr) == 0; ++i) hi = lo + 2.0 * (hi - lo);
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (march(mid, nullptr) == 0 ? lo : hi) = mid;
    }
    FrozenGuess g;
    g.mu = lo;
    march(lo, &g.u);
    // First local maximum, then the first local minimum after it.
    auto cut = g.u.begin();
    while (cut + 1 != g.u.end() && std::abs(cut[1]) >= std::abs(cut[0])) ++cut;
    while (cut + 1 != g.u.end() && cut[1] != 0.0 && std::abs(cut[1]) < std::abs(cut[0])) ++cut;
    g.cut = static_cast<int>(cut - g.u.begin()) + 1;
    std::fill(cut, g.u.end(), 0.0);
    double sum = 0.0;
    for (double x : g.u) sum += x * x;
    const double c = 1.0 / std::sqrt(kFourPi * grid.h() * sum);
    for (double& x : g.u) x *= c;
    return g;
}

RadialState real_state(const RadialGrid& grid, const std::vector<double>& u) {
    RadialState s{grid, std::vector<cplx>(u.size())};
    for (std::size_t i = 0; i < u.size(); ++i) s.u[i] = u[i];
    return s;
}

template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> b{};
    std::memcpy(b.data(), &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    os.write(reinterpret_cast<const char*>(b.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> b{};
    is.read(reinterpret_cast<char*>(b.data()), sizeof(T));
    if (!is) throw ConfigError("checkpoint: truncated file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    T v;
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
}

constexpr std::array<char, 8> kMagic{'L', 'R', 'B', 'E', 'C', 'R', 'S', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

void validate(const RadialGrid& g) {
    if (!(g.r_max > 0.0) || !std::isfinite(g.r_max)) throw ConfigError("grid: r_max must be positive");
    if (g.n < 16) throw ConfigError("grid: n must be at least 16");
}

double RadialState::norm() const { return kFourPi * grid.h() * weighted_sum_sq(*this); }

void RadialState::normalize() {
    const double nn = norm();
    if (!(nn > 0.0)) throw DomainError("state has zero norm");
    const double c = 1.0 / std::sqrt(nn);
    for (cplx& v : u) v *= c;
}

RadialState gaussian_state(const RadialGrid& grid, double k) {
    validate(grid);
    if (!(k > 0.0)) throw ConfigError("gaussian: k must be positive");
    RadialState s{grid, std::vector<cplx>(static_cast<std::size_t>(grid.n))};
    const double amp = std::pow(k * k / kPi, 0.75);
    for (int i = 0; i < grid.n; ++i) {
        const double r = grid.r(i);
        s.u[i] = r * amp * std::exp(-0.5 * k * k * r * r);
    }
    s.normalize();
    return s;
}

std::vector<double> hartree(const RadialState& s) {
    const int n = s.grid.n;
    const double h = s.grid.h();
    // inner[i] = sum_{j<=i} |u_j|^2, outer[i] = sum_{j>i} |u_j|^2 / r_j
    std::vector<double> out(n);
    std::vector<double> tail(n + 1, 0.0);
    for (int i = n - 1; i >= 0; --i) tail[i] = tail[i + 1] + std::norm(s.u[i]) / s.grid.r(i);
    double inner = 0.0;
    for (int i = 0; i < n; ++i) {
        inner += std::norm(s.u[i]);
        out[i] = -kEightPi * h * (inner / s.grid.r(i) + tail[i + 1]);
    }
    return out;
}

std::vector<double> hartree_poisson(const RadialState& s) {
    const int n = s.grid.n;
    const double h = s.grid.h();
    const double h2 = h * h;
    const double w_outer = -kEightPi * h * weighted_sum_sq(s);
    // w_{i-1} - 2 w_i + w_{i+1} = h^2 f_i, Thomas algorithm.
    std::vector<double> c(n), d(n);
    for (int i = 0; i < n; ++i) {
        double rhs = h2 * kEightPi * std::norm(s.u[i]) / s.grid.r(i);
        if (i == n - 1) rhs -= w_outer;
        const double b = -2.0;
        const double denom = i == 0 ? b : b - c[i - 1];
        c[i] = 1.0 / denom;
        d[i] = (i == 0 ? rhs : rhs - d[i - 1]) / denom;
    }
    std::vector<double> w(n);
    w[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) w[i] = d[i] - c[i] * w[i + 1];
    for (int i = 0; i < n; ++i) w[i] /= s.grid.r(i);
    return w;
}

std::vector<double> mean_field_potential(const RadialState& s, const Params& prm) {
    const int n = s.grid.n;
    std::vector<double> v(n, 0.0);
    if (prm.on.long_range) v = hartree(s);
    const double g = contact_strength(prm);
    const double g2 = prm.gamma * prm.gamma;
    for (int i = 0; i < n; ++i) {
        const double r = s.grid.r(i);
        v[i] += g2 * r * r + g * std::norm(s.u[i]) / (r * r);
    }
    return v;
}

std::vector<cplx> apply(const RadialState& s, const Params& prm) {
    const int n = s.grid.n;
    const double h2 = s.grid.h() * s.grid.h();
    const auto v = mean_field_potential(s, prm);
    std::vector<cplx> out(n);
    for (int i = 0; i < n; ++i) {
        const cplx ul = i > 0 ? s.u[i - 1] : cplx{};
        const cplx ur = i + 1 < n ? s.u[i + 1] : cplx{};
        out[i] = (2.0 * s.u[i] - ul - ur) / h2 + v[i] * s.u[i];
    }
    return out;
}

double residual(const RadialState& s, const Params& prm, double mu) {
    const auto hu = apply(s, prm);
    double acc = 0.0;
    for (int i = 0; i < s.grid.n; ++i) acc += std::norm(hu[i] - mu * s.u[i]);
    return std::sqrt(kFourPi * s.grid.h() * acc);
}

Observables observables(const RadialState& s, const Params& prm, KineticForm form) {
    const int n = s.grid.n;
    const double h = s.grid.h();
    const double h2 = h * h;
    const double w = kFourPi * h;
    const double g = contact_strength(prm);
    const double g2 = prm.gamma * prm.gamma;
    const auto u_pot = prm.on.long_range ? hartree(s) : std::vector<double>(n, 0.0);
    Observables o;
    double r2 = 0.0;
    double kin = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = s.grid.r(i);
        const double d = std::norm(s.u[i]);
        r2 += r * r * d;
        if (form == KineticForm::finite_difference) {
            const cplx ul = i > 0 ? s.u[i - 1] : cplx{};
            const cplx ur = i + 1 < n ? s.u[i + 1] : cplx{};
            kin += std::real(std::conj(s.u[i]) * (2.0 * s.u[i] - ul - ur)) / h2;
        }
        o.trap += g2 * r * r * d;
        o.contact += g * d * d / (r * r);
        o.hartree += u_pot[i] * d;
        o.peak_density = std::max(o.peak_density, d / (r * r));
    }
    if (form == KineticForm::spectral) {
        SplitStepper st(s.grid);
        o.kinetic = st.spectral_kinetic(s);
    } else {
        o.kinetic = w * kin;
    }
    o.rms_width = std::sqrt(w * r2);
    o.trap *= w;
    o.contact *= w;
    o.hartree *= w;
    o.energy = o.kinetic + o.trap + 0.5 * (o.contact + o.hartree);
    o.mu = o.kinetic + o.trap + o.contact + o.hartree;
    return o;
}

const char* to_string(Branch b) { return b == Branch::stable ? "stable" : "unstable"; }

namespace {

StationaryResult shoot(const Params& prm, Branch hint, const ShootOptions& opt, bool strict) {
    validate(opt.grid);
    const RadialGrid& grid = opt.grid;
    const auto q_seed = seed_width(prm, hint);
    if (!q_seed) throw DomainError("branch-not-found: no variational seed for this branch at these parameters");

    // Mean field of the seed Gaussian, frozen, gives a nodeless starting orbital.
    const RadialState seed = gaussian_state(grid, width_to_k(*q_seed));
    const FrozenGuess guess = frozen_ground(mean_field_potential(seed, prm), grid);
    const RadialState guess_state = real_state(grid, guess.u);
    const auto u_guess = prm.on.long_range ? hartree(guess_state) : std::vector<double>(grid.n, 0.0);

    // Newton on (u'(0), U(0)) for unit norm and a flat w = r U far field.
    const OutwardMarch march(prm, grid);
    const bool lr = prm.on.long_range;
    std::array<double, 2> x{guess.u[0], u_guess[0]};
    double mu = guess.mu;
    auto eval = [&](const std::array<double, 2>& y, std::optional<OutwardMarch::Result>& out) {
        out = march.solve(y[0], y[1], mu);
        if (!out) return std::array<double, 2>{1e300, 1e300};
        return std::array<double, 2>{out->norm - 1.0, lr ? out->w_slope : 0.0};
    };
    auto size = [](const std::array<double, 2>& f) { return std::hypot(f[0], f[1]); };
    std::optional<OutwardMarch::Result> cur;
    auto f = eval(x, cur);
    if (!cur) throw DomainError("no-convergence: outward march could not bracket the eigenvalue");
    mu = cur->mu;
    const int k = lr ? 2 : 1;
    bool stalled = false;
    for (int it = 0; it < opt.max_newton && size(f) > 1e-9; ++it) {
        Eigen::Matrix2d jac = Eigen::Matrix2d::Identity();
        for (int c = 0; c < k; ++c) {
            auto y = x;
            const double d = 1e-6 * std::max(std::abs(x[c]), 1e-12);
            y[c] += d;
            std::optional<OutwardMarch::Result> tmp;
            const auto fp = eval(y, tmp);
            for (int r = 0; r < k; ++r) jac(r, c) = (fp[r] - f[r]) / d;
        }
        Eigen::Vector2d dx = Eigen::Vector2d::Zero();
        dx.head(k) = jac.topLeftCorner(k, k).fullPivLu().solve(Eigen::Vector2d(-f[0], -f[1]).head(k));
        if (!dx.allFinite()) break;
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30 && !accepted; ++ls, lambda *= 0.5) {
            auto y = x;
            for (int c = 0; c < k; ++c) y[c] += lambda * dx[c];
            std::optional<OutwardMarch::Result> tmp;
            const auto fy = eval(y, tmp);
            if (tmp && size(fy) < size(f)) {
                x = y;
                f = fy;
                cur = std::move(tmp);
                mu = cur->mu;
                accepted = true;
            }
        }
        if (!accepted) {
            stalled = true;
            break;
        }
    }
    if (!(size(f) < 1e-6)) {
        if (stalled)
            throw DomainError("branch-not-found: shooting residual stalls at " + std::to_string(size(f)) +
                              " (parameters below the fold?)");
        throw DomainError("no-convergence: shooting Newton failed to converge");
    }

    std::vector<double> u(grid.n, 0.0), w(grid.n, lr ? -2.0 : 0.0);
    for (int i = 0; i < grid.n; ++i) {
        const int j = i + 1;
        if (j < cur->cut) {
            u[i] = cur->u[j];
            w[i] = cur->w[j];
        }
    }
    polish(u, w, mu, prm, grid, opt.max_newton);

    StationaryResult res;
    res.state = real_state(grid, u);
    res.mu = mu;
    res.residual = residual(res.state, prm, mu);
    const Observables o = observables(res.state, prm);
    res.energy = o.energy;
    res.potential = prm.on.long_range ? hartree(res.state) : std::vector<double>(grid.n, 0.0);
    if (!(res.residual < 1e-6))
        throw DomainError("branch-not-found: residual minimum " + std::to_string(res.residual) +
                          " exceeds tolerance");

    // Label by the variational branch whose width is closest on a log scale.
    res.branch = hint;
    const auto other = seed_width(prm, hint == Branch::stable ? Branch::unstable : Branch::stable);
    if (other && *other != *q_seed &&
        std::abs(std::log(o.rms_width / *other)) < std::abs(std::log(o.rms_width / *q_seed)))
        res.branch = hint == Branch::stable ? Branch::unstable : Branch::stable;
    if (strict && res.branch != hint) throw DomainError("branch-not-found: converged onto the other branch");
    return res;
}

}  // namespace

StationaryResult stationary_shoot(const Params& prm, Branch hint, const ShootOptions& opt) {
    return shoot(prm, hint, opt, true);
}

double fold_a(double gamma, double a_exists, double a_missing, const ShootOptions& opt, double tol) {
    // A stationary state exists at a if shooting from either seed lands on one.
    auto exists = [&](double a) {
        for (const Branch b : {Branch::stable, Branch::unstable}) {
            try {
                shoot(Params{a, gamma, {}}, b, opt, false);
                return true;
            } catch (const DomainError&) {
            }
        }
        return false;
    };
    if (!exists(a_exists)) throw DomainError("branch-not-found: no stationary state at the upper end of the scan");
    if (exists(a_missing)) throw DomainError("branch-not-found: stationary states persist at the lower end of the scan");
    while (std::abs(a_exists - a_missing) > tol) {
        const double mid = 0.5 * (a_exists + a_missing);
        (exists(mid) ? a_exists : a_missing) = mid;
    }
    return 0.5 * (a_exists + a_missing);
}


StationaryResult ground_itp(const Params& prm, const ItpOptions& opt) {
    validate(opt.grid);
    if (!(opt.dt > 0.0)) throw ConfigError("itp: dt must be positive");
    double q0 = opt.initial_width;
    if (!(q0 > 0.0)) {
        const auto q = seed_width(prm, Branch::stable);
        if (!q) throw DomainError("branch-not-found: no stable branch at these parameters");
        q0 = *q;
    }
    const double h = opt.grid.h();
    SplitStepper stepper(opt.grid);

    for (int attempt = 0; attempt < 2; ++attempt) {
        RadialState s = gaussian_state(opt.grid, width_to_k(q0));
        double mu_prev = 0.0;
        bool diverged = false;
        bool converged = false;
        double mu = 0.0;
        std::vector<cplx> prev;
        for (long long stepi = 0; stepi < opt.max_steps; ++stepi) {
            prev = s.u;
            mu = stepper.step(s, opt.dt, prm, TimeMode::imaginary);
            if (!std::isfinite(mu)) {
                diverged = true;
                break;
            }
            if ((stepi & 63) == 0) {
                const Observables o = observables(s, prm);
                if (o.peak_density > 1e6 || o.rms_width < 10.0 * h) {
                    diverged = true;
                    break;
                }
            }
            double change = 0.0;
            for (int i = 0; i < opt.grid.n; ++i) change += std::norm(s.u[i] - prev[i]);
            change = std::sqrt(kFourPi * h * change) / opt.dt;
            const bool mu_ok = stepi > 0 && std::abs(mu - mu_prev) < opt.mu_tolerance * std::max(std::abs(mu), 1e-300);
            mu_prev = mu;
            if (mu_ok && change < opt.state_tolerance) {
                converged = true;
                break;
            }
        }
        if (diverged) {
            q0 *= 2.0;
            continue;
        }
        if (!converged) throw DomainError("no-convergence: imaginary-time propagation hit the step limit");
        // Fix the global sign so that u > 0 near the origin.
        if (std::real(s.u[0]) < 0.0)
            for (cplx& v : s.u) v = -v;
        StationaryResult res;
        res.state = s;
        res.mu = mu;
        res.energy = observables(s, prm, KineticForm::spectral).energy;
        res.branch = Branch::stable;
        res.residual = residual(s, prm, mu);
        res.potential = prm.on.long_range ? hartree(s) : std::vector<double>(opt.grid.n, 0.0);
        const double mu_check = observables(s, prm, KineticForm::spectral).mu;
        if (std::abs(mu_check - mu) > opt.mu_check_tolerance * std::max(1.0, std::abs(mu)))
            throw DomainError("no-convergence: norm-decay mu " + std::to_string(mu) + " disagrees with <psi|H|psi> = " + std::to_string(mu_check));
        return res;
    }
    throw DomainError("no-convergence: imaginary-time propagation diverged twice (collapse-side start)");
}

// ----- split operator ------------------------------------------------------

struct SplitStepper::Plan {
    double* re = nullptr;
    double* im = nullptr;
    fftw_plan one = nullptr;  // transforms re in place
    fftw_plan two = nullptr;  // transforms re and im (contiguous blocks)
    int n = 0;

    explicit Plan(int n_) : n(n_) {
        std::lock_guard lock(fftw_mutex());
        re = static_cast<double*>(fftw_malloc(sizeof(double) * 2 * static_cast<std::size_t>(n)));
        im = re + n;
        const fftw_r2r_kind kind = FFTW_RODFT00;
        one = fftw_plan_r2r_1d(n, re, re, kind, FFTW_ESTIMATE);
        two = fftw_plan_many_r2r(1, &n, 2, re, nullptr, 1, n, re, nullptr, 1, n, &kind, FFTW_ESTIMATE);
    }
    ~Plan() {
        std::lock_guard lock(fftw_mutex());
        fftw_destroy_plan(one);
        fftw_destroy_plan(two);
        fftw_free(re);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;

    // Returns true if the imaginary part is identically zero.
    bool load(const std::vector<cplx>& u) {
        bool real = true;
        for (int i = 0; i < n; ++i) {
            re[i] = u[i].real();
            im[i] = u[i].imag();
            real = real && im[i] == 0.0;
        }
        return real;
    }
    void run(bool real) { fftw_execute(real ? one : two); }
};

SplitStepper::SplitStepper(const RadialGrid& grid) : grid_(grid), plan_(std::make_unique<Plan>(grid.n)) {
    validate(grid);
    k2_.resize(grid.n);
    for (int m = 0; m < grid.n; ++m) {
        const double k = (m + 1) * kPi / grid.r_max;
        k2_[m] = k * k;
    }
}

SplitStepper::~SplitStepper() = default;

void SplitStepper::kinetic(RadialState& s, double dt, TimeMode mode) {
    Plan& p = *plan_;
    const bool real = p.load(s.u);
    const double scale = 1.0 / (2.0 * (grid_.n + 1));
    if (mode == TimeMode::imaginary) {
        if (cached_dt_ != dt || cached_mode_ != mode) {
            factor_.resize(grid_.n);
            for (int m = 0; m < grid_.n; ++m) factor_[m] = scale * std::exp(-k2_[m] * dt);
            cached_dt_ = dt;
            cached_mode_ = mode;
        }
        p.run(real);
        for (int m = 0; m < grid_.n; ++m) {
            p.re[m] *= factor_[m];
            p.im[m] *= factor_[m];
        }
        p.run(real);
    } else {
        if (cached_dt_ != dt || cached_mode_ != mode) {
            phase_.resize(grid_.n);
            for (int m = 0; m < grid_.n; ++m) phase_[m] = std::polar(scale, -k2_[m] * dt);
            cached_dt_ = dt;
            cached_mode_ = mode;
        }
        p.run(false);
        for (int m = 0; m < grid_.n; ++m) {
            const cplx z = cplx(p.re[m], p.im[m]) * phase_[m];
            p.re[m] = z.real();
            p.im[m] = z.imag();
        }
        p.run(false);
    }
    for (int i = 0; i < grid_.n; ++i) s.u[i] = cplx(p.re[i], real && mode == TimeMode::imaginary ? 0.0 : p.im[i]);
}

double SplitStepper::step(RadialState& s, double dt, const Params& prm, TimeMode mode) {
    if (mode == TimeMode::real) {
        // The potential phase leaves |psi| unchanged, so the density after the
        // kinetic step is also the density at the end of the step.
        auto half = [&] {
            const auto v = mean_field_potential(s, prm);
            for (int i = 0; i < grid_.n; ++i) s.u[i] *= std::polar(1.0, -0.5 * dt * v[i]);
        };
        half();
        kinetic(s, dt, mode);
        half();
        return 0.0;
    }
    // Imaginary time: every substep is renormalized, and the closing half step
    // uses the potential of its own output (fixed-point iteration). The norm
    // factors give mu.
    auto decay = [&](RadialState& x, const std::vector<double>& v) {
        for (int i = 0; i < grid_.n; ++i) x.u[i] *= std::exp(-0.5 * dt * v[i]);
        const double nn = x.norm();
        x.normalize();
        return std::log(nn);
    };
    double log_decay = decay(s, mean_field_potential(s, prm));
    kinetic(s, dt, mode);
    {
        const double nn = s.norm();
        s.normalize();
        log_decay += std::log(nn);
    }
    const RadialState mid = s;
    double last = decay(s, mean_field_potential(mid, prm));
    {
        const auto v = mean_field_potential(s, prm);
        s.u = mid.u;
        last = decay(s, v);
    }
    log_decay += last;
    return -log_decay / (2.0 * dt);
}

double SplitStepper::spectral_kinetic(const RadialState& s) {
    Plan& p = *plan_;
    const bool real = p.load(s.u);
    p.run(real);
    double acc = 0.0;
    for (int m = 0; m < grid_.n; ++m) acc += k2_[m] * (p.re[m] * p.re[m] + (real ? 0.0 : p.im[m] * p.im[m]));
    return kFourPi * grid_.h() * acc / (2.0 * (grid_.n + 1));
}

RadialState stretch(const RadialState& s, double f) {
    if (!(f > 0.0) || !std::isfinite(f)) throw ConfigError("stretch: f must be positive");
    const int n = s.grid.n;
    const double h = s.grid.h();
    const double scale = std::pow(f, 2.0 / 3.0);
    const double amp = std::cbrt(f);
    // Sample at radial index j (r = j h) with the odd extension through r = 0.
    auto at = [&](long j) -> cplx {
        if (j == 0 || j >= n + 1) return {};
        if (j < 0) return -s.u[static_cast<std::size_t>(-j - 1)];
        return s.u[static_cast<std::size_t>(j - 1)];
    };
    RadialState out{s.grid, std::vector<cplx>(n)};
    for (int i = 0; i < n; ++i) {
        const double pos = s.grid.r(i) * scale / h;
        const double fl = std::floor(pos);
        const long j0 = static_cast<long>(fl);
        const double t = pos - fl;
        if (j0 >= n + 1) continue;
        const double wm = -t * (t - 1.0) * (t - 2.0) / 6.0;
        const double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        const double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        const double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
        out.u[i] = amp * (wm * at(j0 - 1) + w0 * at(j0) + w1 * at(j0 + 1) + w2 * at(j0 + 2));
    }
    return out;
}

const char* to_string(TrackEnd e) { return e == TrackEnd::completed ? "completed" : "collapse"; }

Track evolve_track(const RadialState& s0, const Params& prm, const EvolveOptions& opt) {
    validate(s0.grid);
    if (!(opt.dt > 0.0) || !(opt.t_end >= 0.0)) throw ConfigError("evolve: dt must be positive and t_end non-negative");
    if (opt.sample_every < 1) throw ConfigError("evolve: sample_every must be >= 1");
    SplitStepper stepper(s0.grid);
    Track tr;
    RadialState s = s0;
    const double h = s0.grid.h();
    auto sample = [&](double t) {
        const Observables o = observables(s, prm, KineticForm::finite_difference);
        TrackSample ts;
        ts.t = t;
        ts.rms_width = o.rms_width;
        ts.energy = stepper.spectral_kinetic(s) + o.trap + 0.5 * (o.contact + o.hartree);
        ts.peak_density = o.peak_density;
        ts.norm = s.norm();
        tr.samples.push_back(ts);
        return ts;
    };
    // Collapse: the rms width or the core width peak_density^(-1/3) falls below
    // the configured number of grid steps.
    const double core_limit = std::pow(opt.collapse_width_cells * h, -3.0);
    const double density_limit = std::min(opt.collapse_density, core_limit);
    auto collapsed = [&](const TrackSample& ts) {
        return !(ts.peak_density <= density_limit) || !(ts.rms_width >= opt.collapse_width_cells * h);
    };
    if (collapsed(sample(0.0))) {
        tr.termination = TrackEnd::collapse;
        tr.final_state = s;
        return tr;
    }
    const auto steps = static_cast<long long>(std::llround(opt.t_end / opt.dt));
    for (long long k = 1; k <= steps; ++k) {
        stepper.step(s, opt.dt, prm, TimeMode::real);
        double peak = 0.0;
        for (int i = 0; i < s.grid.n; ++i) {
            const double r = s.grid.r(i);
            peak = std::max(peak, std::norm(s.u[i]) / (r * r));
        }
        const bool due = k % opt.sample_every == 0 || k == steps;
        if (due || !(peak <= density_limit)) {
            const TrackSample ts = sample(static_cast<double>(k) * opt.dt);
            if (collapsed(ts)) {
                tr.termination = TrackEnd::collapse;
                break;
            }
        }
    }
    tr.final_state = std::move(s);
    return tr;
}

void write_checkpoint(const std::filesystem::path& path, const RadialState& s) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("checkpoint: cannot open " + path.string() + " for writing");
    os.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(os, kCheckpointVersion);
    put_le<std::uint64_t>(os, static_cast<std::uint64_t>(s.grid.n));
    put_le<double>(os, s.grid.r_max);
    for (const cplx& v : s.u) {
        put_le<double>(os, v.real());
        put_le<double>(os, v.imag());
    }
    if (!os) throw ConfigError("checkpoint: write failed for " + path.string());
}

RadialState read_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("checkpoint: cannot open " + path.string());
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) throw ConfigError("checkpoint: bad magic in " + path.string());
    const auto version = get_le<std::uint32_t>(is);
    if (version != kCheckpointVersion) throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
    const auto n = get_le<std::uint64_t>(is);
    const double r_max = get_le<double>(is);
    if (n < 16 || n > (1ULL << 28)) throw ConfigError("checkpoint: implausible n");
    RadialState s{RadialGrid{r_max, static_cast<int>(n)}, std::vector<cplx>(n)};
    validate(s.grid);
    for (auto& v : s.u) {
        const double re = get_le<double>(is);
        const double im = get_le<double>(is);
        v = {re, im};
    }
    return s;
}

}  // namespace lrbec::gpe
