#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lrbec::gpe {

using cplx = std::complex<double>;

/// Uniform grid of n interior points r_i = i h, i = 1..n, with h = r_max/(n+1).
/// u vanishes at r = 0 and r = r_max.
struct RadialGrid {
    double r_max = 16.0;
    int n = 2048;

    [[nodiscard]] double h() const { return r_max / (n + 1); }
    [[nodiscard]] double r(int i) const { return (i + 1) * h(); }  ///< i is 0-based
};

void validate(const RadialGrid& g);

/// Samples of u(r) = r psi(r) with the norm 4 pi int |u|^2 dr = int |psi|^2 d^3r.
struct RadialState {
    RadialGrid grid;
    std::vector<cplx> u;

    [[nodiscard]] double norm() const;  ///< int |psi|^2 d^3r
    void normalize();
};

/// Normalized Gaussian orbital with |psi|^2 = (k^2/pi)^(3/2) exp(-k^2 r^2).
RadialState gaussian_state(const RadialGrid& grid, double k);

/// Which pieces of the mean-field potential are active.
struct Interactions {
    bool contact = true;
    bool long_range = true;
};

/// Scaled 1/r gas: [-Lap + gamma^2 r^2 + 8 pi a |psi|^2 + U] psi = mu psi,
/// U(r) = -2 int |psi(r')|^2 / |r - r'| d^3r'.
struct Params {
    double a = 0.0;
    double gamma = 0.0;
    Interactions on;
};

/// Hartree potential by cumulative trapezoid sums of
/// U(r) = -2 [ (1/r) int_0^r |psi|^2 4 pi r'^2 dr' + int_r^R |psi|^2 4 pi r' dr' ].
std::vector<double> hartree(const RadialState& s);

/// Same potential from the radial Poisson problem (r U)'' = 8 pi r |psi|^2,
/// r U = 0 at the origin and -(total charge) * 2 at r_max, by a tridiagonal solve.
std::vector<double> hartree_poisson(const RadialState& s);

/// Local mean-field potential gamma^2 r^2 + 8 pi a |psi|^2 + U on the grid.
std::vector<double> mean_field_potential(const RadialState& s, const Params& prm);

/// (H psi) sampled as r (H psi), with the second-order central-difference Laplacian.
std::vector<cplx> apply(const RadialState& s, const Params& prm);

/// || H psi - mu psi ||_2 in the d^3r measure.
double residual(const RadialState& s, const Params& prm, double mu);

enum class KineticForm { finite_difference, spectral };

struct Observables {
    double rms_width = 0.0;  ///< sqrt(<r^2>)
    double kinetic = 0.0;
    double trap = 0.0;
    double contact = 0.0;    ///< <8 pi a |psi|^2>
    double hartree = 0.0;    ///< <U>
    double energy = 0.0;     ///< kinetic + trap + contact/2 + hartree/2
    double mu = 0.0;         ///< <psi|H|psi>
    double peak_density = 0.0;
};

Observables observables(const RadialState& s, const Params& prm,
                        KineticForm form = KineticForm::finite_difference);

enum class Branch { stable, unstable };

const char* to_string(Branch b);

struct StationaryResult {
    RadialState state;
    double mu = 0.0;
    double energy = 0.0;
    Branch branch = Branch::stable;
    double residual = 0.0;
    std::vector<double> potential;  ///< Hartree U(r)
};

struct ShootOptions {
    RadialGrid grid{16.0, 2048};
    int max_newton = 100;
    double tail_tolerance = 1e-9;  ///< relative |u| near the matching radius
};

/// Outward integration of the discretized u, w = r U equations from r = 0 with
/// Newton on (mu, u'(0), U(0)) to satisfy decay, normalization and a flat far
/// field of w. Initial guesses come from the variational Gaussian of the branch.
/// Throws DomainError ("branch-not-found" / "no-convergence").
StationaryResult stationary_shoot(const Params& prm, Branch hint, const ShootOptions& opt = {});

/// Scattering length below which the shooting solver finds no stationary state,
/// by bisection between a value where one exists and one where none does.
double fold_a(double gamma, double a_exists, double a_missing, const ShootOptions& opt = {},
              double tol = 1e-4);

struct ItpOptions {
    RadialGrid grid{16.0, 2048};
    double dt = 1e-3;
    double mu_tolerance = 1e-10;    ///< relative change of mu per step
    double state_tolerance = 1e-9;  ///< ||psi_{n+1} - psi_n|| / dt
    long long max_steps = 5'000'000;
    double initial_width = 0.0;     ///< rms width of the start Gaussian; 0 picks the variational one
    double mu_check_tolerance = 1e-6;  ///< relative gap allowed between norm-decay mu and <psi|H|psi>
};

/// Ground state by imaginary-time split-operator propagation.
StationaryResult ground_itp(const Params& prm, const ItpOptions& opt = {});

enum class TimeMode { real, imaginary };

/// Strang-split propagator; the kinetic factor is applied to u through a
/// type-I discrete sine transform with k_m = m pi / r_max.
class SplitStepper {
public:
    explicit SplitStepper(const RadialGrid& grid);
    ~SplitStepper();
    SplitStepper(const SplitStepper&) = delete;
    SplitStepper& operator=(const SplitStepper&) = delete;

    /// One step. In imaginary mode the state is renormalized and the return value
    /// is the mu estimate from the norm decay; in real mode it returns 0.
    double step(RadialState& s, double dt, const Params& prm, TimeMode mode);

    /// <psi| -Lap |psi> with the spectral Laplacian.
    double spectral_kinetic(const RadialState& s);

private:
    void kinetic(RadialState& s, double dt, TimeMode mode);

    struct Plan;
    RadialGrid grid_;
    std::unique_ptr<Plan> plan_;
    std::vector<double> k2_;
    std::vector<double> factor_;
    std::vector<cplx> phase_;
    double cached_dt_ = -1.0;
    TimeMode cached_mode_ = TimeMode::real;
};

/// psi(r) -> f psi(r f^(2/3)) by cubic interpolation of u; norm-preserving.
RadialState stretch(const RadialState& s, double f);

struct TrackSample {
    double t = 0.0;
    double rms_width = 0.0;
    double energy = 0.0;
    double peak_density = 0.0;
    double norm = 0.0;
};

enum class TrackEnd { completed, collapse };

const char* to_string(TrackEnd e);

struct Track {
    std::vector<TrackSample> samples;
    TrackEnd termination = TrackEnd::completed;
    RadialState final_state;
};

struct EvolveOptions {
    double t_end = 10.0;
    double dt = 1e-4;
    int sample_every = 100;
    double collapse_density = 1e6;
    double collapse_width_cells = 10.0;  ///< collapse when the rms or core width < this many grid steps
};

/// Real-time evolution with observable sampling and collapse detection.
Track evolve_track(const RadialState& s0, const Params& prm, const EvolveOptions& opt);

/// Little-endian layout: "LRBECRS\0", u32 version = 1, u64 n, f64 r_max, then
/// n (re, im) f64 pairs.
void write_checkpoint(const std::filesystem::path& path, const RadialState& s);
RadialState read_checkpoint(const std::filesystem::path& path);

}  // namespace lrbec::gpe
