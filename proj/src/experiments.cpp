#include "lrbec/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "lrbec/dipolar.hpp"
#include "lrbec/errors.hpp"
#include "lrbec/manifest.hpp"
#include "lrbec/monopolar.hpp"
#include "lrbec/parallel.hpp"
#include "lrbec/radial_gpe.hpp"

namespace lrbec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ----- schema --------------------------------------------------------------

std::vector<Key> mono_keys() {
    return {
        {"n", KeyType::integer, 1, "particle number"},
        {"a", KeyType::number, -0.85, "scattering length, a/a_u (scaled N^2 a/a_u with --scaled)"},
        {"gamma", KeyType::number, 0.0, "trap frequency (scaled gamma/N^2 with --scaled)"},
        {"scaled", KeyType::boolean, false, "treat a and gamma as scaled parameters"},
    };
}

std::vector<Key> dip_keys() {
    return {
        {"n", KeyType::integer, 1, "particle number"},
        {"a", KeyType::number, 0.1, "scattering length a/a_d"},
        {"gamma_rho", KeyType::number, 1.0, "radial trap frequency in dipole units"},
        {"gamma_z", KeyType::number, 1.0, "axial trap frequency in dipole units"},
        {"scaled", KeyType::boolean, false, "use gamma_bar and lambda instead of n, gamma_rho, gamma_z"},
        {"gamma_bar", KeyType::number, 3.4e4, "N^2 (gamma_rho^2 gamma_z)^(1/3), with --scaled"},
        {"lambda", KeyType::number, 6.0, "aspect ratio gamma_z/gamma_rho, with --scaled"},
    };
}

std::vector<Key> with(std::vector<Key> base, std::initializer_list<Key> extra, const std::string& output) {
    base.insert(base.end(), extra.begin(), extra.end());
    base.push_back({"output", KeyType::string, output, "primary output table"});
    return base;
}

const std::map<std::string, std::vector<Key>>& all_schemas() {
    static const std::map<std::string, std::vector<Key>> table = [] {
        std::map<std::string, std::vector<Key>> t;
        t["bifurcate-mono"] = with(mono_keys(),
                                   {{"a_min", KeyType::number, -1.3, "sweep start"},
                                    {"a_max", KeyType::number, -0.2, "sweep end"},
                                    {"a_steps", KeyType::integer, 111, "sweep points"}},
                                   "bifurcate-mono.tsv");
        t["bifurcate-dip"] = with(dip_keys(),
                                  {{"a_min", KeyType::number, -0.5, "sweep start"},
                                   {"a_max", KeyType::number, 0.5, "sweep end"},
                                   {"a_steps", KeyType::integer, 101, "sweep points"}},
                                  "bifurcate-dip.tsv");
        t["landscape"] = with(dip_keys(),
                              {{"q_rho_min", KeyType::number, 0.2, "in trap lengths"},
                               {"q_rho_max", KeyType::number, 4.0, "in trap lengths"},
                               {"q_z_min", KeyType::number, 0.2, "in trap lengths"},
                               {"q_z_max", KeyType::number, 4.0, "in trap lengths"},
                               {"n_rho", KeyType::integer, 100, "raster columns"},
                               {"n_z", KeyType::integer, 100, "raster rows"},
                               {"log_spacing", KeyType::boolean, false, "logarithmic raster spacing"}},
                              "landscape.tsv");
        t["portrait"] = with(mono_keys(),
                             {{"q_min", KeyType::number, 1.0, "first start width"},
                              {"q_max", KeyType::number, 5.0, "last start width"},
                              {"n_orbits", KeyType::integer, 9, "orbits"},
                              {"p0", KeyType::number, 0.0, "start momentum"},
                              {"t_end", KeyType::number, 100.0, "orbit length"},
                              {"dt", KeyType::number, 1e-3, "time step"},
                              {"sample_every", KeyType::integer, 100, "steps between samples"},
                              {"scheme", KeyType::string, "verlet", "verlet | yoshida4"}},
                             "portrait.tsv");
        t["poincare"] = with(dip_keys(),
                             {{"energy", KeyType::number, 4.5e5, "N E of the seeds"},
                              {"window", KeyType::string, "well", "well | shell"},
                              {"n_q", KeyType::integer, 5, "seed grid along q_rho"},
                              {"n_p", KeyType::integer, 4, "seed grid along p_rho"},
                              {"n_crossings", KeyType::integer, 200, "crossings per orbit"},
                              {"t_max", KeyType::number, 1e4, "time limit per orbit"},
                              {"dt", KeyType::number, 1e-3, "time step"},
                              {"direction", KeyType::string, "positive", "positive | negative | both"},
                              {"scheme", KeyType::string, "yoshida4", "verlet | yoshida4"}},
                             "poincare.tsv");
        t["stationary"] = with(mono_keys(),
                               {{"branch", KeyType::string, "stable", "stable | unstable"},
                                {"method", KeyType::string, "shoot", "shoot | itp"},
                                {"r_max", KeyType::number, 32.0, "grid radius"},
                                {"grid_n", KeyType::integer, 2047, "interior grid points"},
                                {"dt", KeyType::number, 1e-3, "imaginary time step (itp)"},
                                {"checkpoint", KeyType::string, "", "write the state here"}},
                               "stationary.tsv");
        t["evolve"] = with(mono_keys(),
                           {{"branch", KeyType::string, "stable", "start state: stable | unstable"},
                            {"initial_checkpoint", KeyType::string, "", "start from this state instead"},
                            {"stretch", KeyType::number, 1.0, "psi(r) -> f psi(r f^(2/3))"},
                            {"r_max", KeyType::number, 80.0, "grid radius"},
                            {"grid_n", KeyType::integer, 4095, "interior grid points"},
                            {"t_end", KeyType::number, 10.0, "evolution time"},
                            {"dt", KeyType::number, 1e-4, "time step"},
                            {"sample_every", KeyType::integer, 100, "steps between rows"},
                            {"checkpoint", KeyType::string, "", "write the final state here"}},
                           "evolve.tsv");
        t["classify-sweep"] = with(dip_keys(),
                                   {{"energies", KeyType::number_list, json::array({4.5e5, 9e5, 6e6}), "N E values"},
                                    {"n_q", KeyType::integer, 17, "seed grid along q_rho"},
                                    {"n_p", KeyType::integer, 17, "seed grid along p_rho"},
                                    {"t_end", KeyType::number, 2000.0, "Lyapunov run length"},
                                    {"dt", KeyType::number, 1e-3, "time step"},
                                    {"threshold", KeyType::number, 0.0, "MLE threshold, 0 = automatic"}},
                                   "classify-sweep.tsv");
        return t;
    }();
    return table;
}

bool type_ok(const json& v, KeyType t) {
    switch (t) {
        case KeyType::number: return v.is_number();
        case KeyType::integer: return v.is_number_integer();
        case KeyType::boolean: return v.is_boolean();
        case KeyType::string: return v.is_string();
        case KeyType::number_list:
            return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
    }
    return false;
}

// ----- parameters ----------------------------------------------------------

MonopolarScaled mono_params(const json& c) {
    if (c["scaled"].get<bool>()) {
        MonopolarScaled s{c["gamma"].get<double>(), c["a"].get<double>()};
        validate(s);
        return s;
    }
    const auto n = c["n"].get<long long>();
    if (n < 1) throw ConfigError("n must be at least 1");
    MonopolarPhysical p{static_cast<std::uint64_t>(n), c["a"].get<double>(), c["gamma"].get<double>()};
    validate(p);
    return to_scaled(p);
}

/// Scaled a for a value given in the input units of the config.
double mono_scaled_a(const json& c, double a) {
    if (c["scaled"].get<bool>()) return a;
    const double n = static_cast<double>(c["n"].get<long long>());
    return n * n * a;
}

DipolarScaled dip_params(const json& c) {
    if (c["scaled"].get<bool>()) {
        DipolarScaled s{c["gamma_bar"].get<double>(), c["lambda"].get<double>(), c["a"].get<double>()};
        validate(s);
        return s;
    }
    const auto n = c["n"].get<long long>();
    if (n < 1) throw ConfigError("n must be at least 1");
    DipolarPhysical p{static_cast<std::uint64_t>(n), c["a"].get<double>(), c["gamma_rho"].get<double>(),
                      c["gamma_z"].get<double>()};
    validate(p);
    return to_scaled(p);
}

json to_json(const MonopolarScaled& p) { return {{"a_scaled", p.a_scaled}, {"gamma_scaled", p.gamma_scaled}}; }

json to_json(const DipolarScaled& p) {
    return {{"gamma_bar_scaled", p.gamma_bar_scaled}, {"lambda", p.lambda}, {"a_scaled", p.a_scaled}};
}

int positive_int(const json& c, const char* key) {
    const auto v = c[key].get<long long>();
    if (v < 1 || v > 100'000'000) throw ConfigError(std::string(key) + " must be a positive count");
    return static_cast<int>(v);
}

double positive(const json& c, const char* key) {
    const double v = c[key].get<double>();
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be positive");
    return v;
}

std::vector<double> sweep(double lo, double hi, int steps) {
    std::vector<double> v;
    for (int i = 0; i < steps; ++i) v.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
    return v;
}

dyn::Scheme scheme_of(const json& c) {
    const auto s = c["scheme"].get<std::string>();
    if (s == "verlet") return dyn::Scheme::verlet;
    if (s == "yoshida4") return dyn::Scheme::yoshida4;
    throw ConfigError("scheme must be verlet or yoshida4");
}

gpe::Branch branch_of(const json& c) {
    const auto s = c["branch"].get<std::string>();
    if (s == "stable") return gpe::Branch::stable;
    if (s == "unstable") return gpe::Branch::unstable;
    throw ConfigError("branch must be stable or unstable");
}

// ----- tables --------------------------------------------------------------

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

class Table {
public:
    Table(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot open " + path.string() + " for writing");
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << '\t';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw ConfigError("write failed");
    }

private:
    std::ofstream out_;
};

struct Context {
    const json& config;
    fs::path output;
    RunManifest& manifest;
};

void add_output(Context& ctx, const fs::path& p) { ctx.manifest.outputs.push_back(p.string()); }

// ----- subcommands ---------------------------------------------------------

void bifurcate_mono(Context& ctx) {
    const json& c = ctx.config;
    const MonopolarScaled base = mono_params(c);
    const int steps = positive_int(c, "a_steps");
    std::vector<double> as;
    for (double a : sweep(c["a_min"].get<double>(), c["a_max"].get<double>(), steps)) as.push_back(mono_scaled_a(c, a));
    const double fold = mono::critical_a(base.gamma_scaled);
    const auto [lo, hi] = std::minmax(as.front(), as.back());
    if (fold >= lo && fold <= hi && std::find(as.begin(), as.end(), fold) == as.end()) as.push_back(fold);
    std::sort(as.begin(), as.end());

    Table t(ctx.output, {"a", "branch_id", "q_star", "energy", "mu", "kind"});
    for (double a : as) {
        const auto fps = mono::fixed_points({a, base.gamma_scaled});
        for (std::size_t i = 0; i < fps.size(); ++i)
            t.row({num(a), std::to_string(i), num(fps[i].q_star), num(fps[i].energy), num(fps[i].mu),
                   mono::to_string(fps[i].kind)});
    }
    t.close();
    ctx.manifest.parameters = to_json(base);
    ctx.manifest.summary = {{"fold_a", fold}};
}

void bifurcate_dip(Context& ctx) {
    const json& c = ctx.config;
    const DipolarScaled base = dip_params(c);
    const dip::SearchOptions so;
    Table t(ctx.output, {"a", "branch", "q_rho_star", "q_z_star", "NE", "Nmu", "kind"});
    json warnings = json::array();
    for (double a : sweep(c["a_min"].get<double>(), c["a_max"].get<double>(), positive_int(c, "a_steps"))) {
        DipolarScaled prm = base;
        prm.a_scaled = a;
        const auto set = dip::fixed_points(prm, so);
        for (const auto& w : set.warnings) warnings.push_back(num(a) + ": " + w);
        for (std::size_t i = 0; i < set.points.size(); ++i) {
            const auto& p = set.points[i];
            t.row({num(a), std::to_string(i), num(p.q_rho_star), num(p.q_z_star), num(p.energy), num(p.mu),
                   dip::to_string(p.kind)});
        }
    }
    t.close();
    ctx.manifest.parameters = to_json(base);
    ctx.manifest.tolerances = {{"gradient", so.tolerance}, {"dedup", so.dedup}};
    ctx.manifest.summary = {{"warnings", warnings}};
}

void landscape(Context& ctx) {
    const json& c = ctx.config;
    const DipolarScaled prm = dip_params(c);
    const double len = dip::trap_length(prm);
    const int nr = positive_int(c, "n_rho");
    const int nz = positive_int(c, "n_z");
    const bool lg = c["log_spacing"].get<bool>();
    const auto axis = [&](const char* lo_key, const char* hi_key, int n) {
        const double lo = positive(c, lo_key);
        const double hi = positive(c, hi_key);
        std::vector<double> v;
        for (int i = 0; i < n; ++i) {
            const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
            v.push_back(len * (lg ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f));
        }
        return v;
    };
    const auto qr = axis("q_rho_min", "q_rho_max", nr);
    const auto qz = axis("q_z_min", "q_z_max", nz);
    Table t(ctx.output, {"q_rho", "q_z", "V"});
    for (double z : qz)
        for (double r : qr) t.row({num(r), num(z), num(dip::potential(r, z, prm))});
    t.close();
    ctx.manifest.parameters = to_json(prm);
    ctx.manifest.summary = {{"trap_length", len}};
}

void portrait(Context& ctx) {
    const json& c = ctx.config;
    const MonopolarScaled prm = mono_params(c);
    const auto sys = dyn::make_system(mono::Params{prm.a_scaled, prm.gamma_scaled});
    dyn::IntegrateOptions io;
    io.t_end = positive(c, "t_end");
    io.dt = positive(c, "dt");
    io.sample_every = positive_int(c, "sample_every");
    io.scheme = scheme_of(c);
    const auto qs = sweep(positive(c, "q_min"), positive(c, "q_max"), positive_int(c, "n_orbits"));
    std::vector<dyn::Trajectory> trajs(qs.size());
    parallel_for(qs.size(), default_workers(), [&](std::size_t i) {
        trajs[i] = dyn::integrate(sys, dyn::PhaseState{{qs[i], 1.0}, {c["p0"].get<double>(), 0.0}}, io);
    });
    Table t(ctx.output, {"orbit", "t", "q", "p", "energy", "termination"});
    json terms = json::array();
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const auto& tr = trajs[i];
        const char* term = dyn::to_string(tr.termination);
        terms.push_back(term);
        for (std::size_t k = 0; k < tr.times.size(); ++k)
            t.row({std::to_string(i), num(tr.times[k]), num(tr.states[k].q[0]), num(tr.states[k].p[0]),
                   num(tr.energies[k]), term});
    }
    t.close();
    ctx.manifest.parameters = to_json(prm);
    ctx.manifest.integrator = {{"scheme", c["scheme"]}, {"dt", io.dt}, {"t_end", io.t_end},
                               {"collapse_width", io.collapse_width}, {"escape_width", io.escape_width}};
    ctx.manifest.summary = {{"terminations", terms}};
    if (std::any_of(trajs.begin(), trajs.end(), [](const auto& tr) { return tr.termination != dyn::Termination::completed; }))
        ctx.manifest.termination = "partial";
}

std::optional<dyn::SeedWindow> window_of(const json& c, const DipolarScaled& prm, const dyn::HamSystem& sys,
                                         double energy) {
    const auto w = c["window"].get<std::string>();
    if (w == "well") return dyn::well_window(prm, energy);
    if (w == "shell") return dyn::section_window(sys, energy);
    throw ConfigError("window must be well or shell");
}

void poincare(Context& ctx) {
    const json& c = ctx.config;
    const DipolarScaled prm = dip_params(c);
    const auto sys = dyn::make_system(prm);
    const double energy = c["energy"].get<double>();
    dyn::SectionOptions so;
    so.n_crossings = positive_int(c, "n_crossings");
    so.t_max = positive(c, "t_max");
    so.dt = positive(c, "dt");
    so.scheme = scheme_of(c);
    const auto dir = c["direction"].get<std::string>();
    if (dir == "positive") so.direction = dyn::Direction::positive;
    else if (dir == "negative") so.direction = dyn::Direction::negative;
    else if (dir == "both") so.direction = dyn::Direction::both;
    else throw ConfigError("direction must be positive, negative or both");
    const int n_q = positive_int(c, "n_q");
    const int n_p = positive_int(c, "n_p");
    const auto win = window_of(c, prm, sys, energy);
    const auto seeds = win ? dyn::seed_on_section(sys, energy, *win, n_q, n_p) : std::vector<dyn::PhaseState>{};
    const auto sections = dyn::poincare(sys, seeds, so, default_workers());

    Table t(ctx.output, {"orbit_id", "t", "re_a_rho", "im_a_rho", "termination"});
    json terms = json::array();
    for (const auto& sec : sections) {
        const char* term = dyn::to_string(sec.termination);
        terms.push_back(term);
        for (const auto& p : sec.points)
            t.row({std::to_string(p.orbit), num(p.t), num(p.re_a_rho), num(p.im_a_rho), term});
    }
    t.close();
    ctx.manifest.parameters = to_json(prm);
    ctx.manifest.integrator = {{"scheme", c["scheme"]}, {"dt", so.dt}, {"t_max", so.t_max},
                               {"plane", "p_z = 0"}, {"direction", dir}};
    ctx.manifest.tolerances = {{"crossing_p_z", 1e-10}, {"seed_energy", 1e-10}};
    ctx.manifest.summary = {{"seeds", seeds.size()}, {"terminations", terms}};
    if (std::any_of(sections.begin(), sections.end(), [](const auto& s) { return s.termination != dyn::Termination::completed; }))
        ctx.manifest.termination = "partial";
}

gpe::RadialGrid grid_of(const json& c) {
    gpe::RadialGrid g{positive(c, "r_max"), positive_int(c, "grid_n")};
    gpe::validate(g);
    return g;
}

void stationary(Context& ctx) {
    const json& c = ctx.config;
    const MonopolarScaled sp = mono_params(c);
    const gpe::Params prm{sp.a_scaled, sp.gamma_scaled, {}};
    const auto method = c["method"].get<std::string>();
    const gpe::Branch branch = branch_of(c);
    gpe::StationaryResult res;
    if (method == "shoot") {
        gpe::ShootOptions so;
        so.grid = grid_of(c);
        res = gpe::stationary_shoot(prm, branch, so);
        ctx.manifest.tolerances = {{"shooting", 1e-6}, {"residual", 1e-6}};
    } else if (method == "itp") {
        if (branch != gpe::Branch::stable) throw ConfigError("imaginary-time propagation reaches the stable branch only");
        gpe::ItpOptions io;
        io.grid = grid_of(c);
        io.dt = positive(c, "dt");
        res = gpe::ground_itp(prm, io);
        ctx.manifest.tolerances = {{"mu", io.mu_tolerance}, {"state", io.state_tolerance}};
        ctx.manifest.integrator = {{"dt", io.dt}};
    } else {
        throw ConfigError("method must be shoot or itp");
    }
    const auto& g = res.state.grid;
    Table t(ctx.output, {"r", "re_psi", "im_psi", "U"});
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r(i);
        t.row({num(r), num(res.state.u[i].real() / r), num(res.state.u[i].imag() / r), num(res.potential[i])});
    }
    t.close();
    const gpe::Observables o = gpe::observables(res.state, prm);
    const json summary = {{"mu", res.mu},           {"energy", res.energy},      {"branch", gpe::to_string(res.branch)},
                          {"residual", res.residual}, {"rms_width", o.rms_width}, {"method", method}};
    const fs::path sfile = ctx.output.string() + ".summary.json";
    std::ofstream(sfile) << summary.dump(2) << "\n";
    add_output(ctx, sfile);
    if (const auto cp = c["checkpoint"].get<std::string>(); !cp.empty()) {
        gpe::write_checkpoint(cp, res.state);
        add_output(ctx, cp);
    }
    ctx.manifest.parameters = to_json(sp);
    ctx.manifest.summary = summary;
}

void evolve(Context& ctx) {
    const json& c = ctx.config;
    const MonopolarScaled sp = mono_params(c);
    const gpe::Params prm{sp.a_scaled, sp.gamma_scaled, {}};
    gpe::RadialState s0;
    json start;
    if (const auto ic = c["initial_checkpoint"].get<std::string>(); !ic.empty()) {
        s0 = gpe::read_checkpoint(ic);
        start = {{"checkpoint", ic}};
    } else {
        gpe::ShootOptions so;
        so.grid = grid_of(c);
        const auto st = gpe::stationary_shoot(prm, branch_of(c), so);
        s0 = st.state;
        start = {{"branch", gpe::to_string(st.branch)}, {"mu", st.mu}, {"energy", st.energy}};
    }
    const double f = positive(c, "stretch");
    if (f != 1.0) s0 = gpe::stretch(s0, f);
    gpe::EvolveOptions eo;
    eo.t_end = positive(c, "t_end");
    eo.dt = positive(c, "dt");
    eo.sample_every = positive_int(c, "sample_every");
    const gpe::Track tr = gpe::evolve_track(s0, prm, eo);
    Table t(ctx.output, {"t", "width", "energy", "peak_density", "norm"});
    for (const auto& smp : tr.samples)
        t.row({num(smp.t), num(smp.rms_width), num(smp.energy), num(smp.peak_density), num(smp.norm)});
    t.close();
    if (const auto cp = c["checkpoint"].get<std::string>(); !cp.empty()) {
        gpe::write_checkpoint(cp, tr.final_state);
        add_output(ctx, cp);
    }
    ctx.manifest.parameters = to_json(sp);
    ctx.manifest.integrator = {{"method", "Strang split operator, sine transform kinetic step"},
                               {"dt", eo.dt}, {"t_end", eo.t_end}, {"r_max", s0.grid.r_max}, {"grid_n", s0.grid.n}};
    ctx.manifest.tolerances = {{"collapse_density", eo.collapse_density},
                               {"collapse_width_cells", eo.collapse_width_cells}};
    ctx.manifest.termination = gpe::to_string(tr.termination);
    ctx.manifest.summary = {{"start", start}, {"stretch", f}, {"termination", gpe::to_string(tr.termination)},
                            {"t_final", tr.samples.empty() ? 0.0 : tr.samples.back().t}};
}

void classify_sweep_cmd(Context& ctx) {
    const json& c = ctx.config;
    SweepOptions so;
    so.prm = dip_params(c);
    so.energies = c["energies"].get<std::vector<double>>();
    so.n_q = positive_int(c, "n_q");
    so.n_p = positive_int(c, "n_p");
    so.t_end = positive(c, "t_end");
    so.dt = positive(c, "dt");
    so.threshold = c["threshold"].get<double>();
    if (so.threshold < 0.0) throw ConfigError("threshold must be non-negative");
    so.workers = default_workers();
    const SweepResult res = classify_sweep(so);

    Table t(ctx.output, {"energy", "seed", "q_rho", "q_z", "p_rho", "class", "mle"});
    for (const auto& cell : res.cells)
        t.row({num(cell.energy), std::to_string(cell.seed), num(cell.state.q[0]), num(cell.state.q[1]),
               num(cell.state.p[0]), dyn::to_string(cell.orbit_class), num(cell.mle)});
    t.close();
    const fs::path ffile = ctx.output.string() + ".fractions.tsv";
    Table ft(ffile, {"energy", "seeds", "regular", "chaotic", "collapse", "escape", "island_fraction"});
    json fr = json::array();
    for (const auto& e : res.energies) {
        ft.row({num(e.energy), std::to_string(e.seeds), std::to_string(e.regular), std::to_string(e.chaotic),
                std::to_string(e.collapse), std::to_string(e.escape), num(e.island_fraction)});
        fr.push_back({{"energy", e.energy}, {"seeds", e.seeds}, {"island_fraction", e.island_fraction}});
    }
    ft.close();
    add_output(ctx, ffile);
    ctx.manifest.parameters = to_json(so.prm);
    ctx.manifest.integrator = {{"scheme", "verlet"}, {"dt", so.dt}, {"t_end", so.t_end}};
    ctx.manifest.tolerances = {{"mle_threshold", res.threshold}, {"separation", 1e-8}, {"renorm_interval", 1.0}};
    ctx.manifest.summary = {{"fractions", fr}};
}

using Handler = void (*)(Context&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> h{
        {"bifurcate-mono", bifurcate_mono}, {"bifurcate-dip", bifurcate_dip}, {"landscape", landscape},
        {"portrait", portrait},             {"poincare", poincare},           {"stationary", stationary},
        {"evolve", evolve},                 {"classify-sweep", classify_sweep_cmd},
    };
    return h;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"bifurcate-mono", "bifurcate-dip", "landscape",  "portrait",
                                                "poincare",       "stationary",    "evolve",     "classify-sweep"};
    return names;
}

const std::vector<Key>& schema(const std::string& subcommand) {
    const auto& t = all_schemas();
    const auto it = t.find(subcommand);
    if (it == t.end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
    return it->second;
}

json resolve(const std::string& subcommand, const json& overrides) {
    const auto& keys = schema(subcommand);
    if (!overrides.is_null() && !overrides.is_object()) throw ConfigError("configuration must be a JSON object");
    json out = json::object();
    for (const auto& k : keys) out[k.name] = k.fallback;
    if (overrides.is_object()) {
        for (const auto& [name, value] : overrides.items()) {
            const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == name; });
            if (it == keys.end()) throw ConfigError("unknown key '" + name + "' for " + subcommand);
            if (!type_ok(value, it->type)) throw ConfigError("key '" + name + "' has the wrong type");
            out[name] = value;
        }
    }
    return out;
}

int run(const std::string& subcommand, const json& config, const std::string& command_line, std::ostream& err) {
    try {
        const json c = resolve(subcommand, config);
        const fs::path output = c["output"].get<std::string>();
        if (output.empty()) throw ConfigError("output must not be empty");
        const fs::path mpath = manifest_path(output);
        if (fs::exists(mpath)) throw ConfigError("manifest " + mpath.string() + " already exists");

        RunManifest m;
        m.command_line = command_line;
        m.subcommand = subcommand;
        m.config = c;
        m.version = version();
        m.started = utc_now();
        m.outputs.push_back(output.string());
        const auto t0 = std::chrono::steady_clock::now();
        Context ctx{c, output, m};
        handlers().at(subcommand)(ctx);
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        m.finished = utc_now();
        write_manifest(mpath, m);
        return Exit::ok;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return Exit::schema_error;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return Exit::schema_error;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return Exit::domain_error;
    }
}

SweepResult classify_sweep(const SweepOptions& opt) {
    validate(opt.prm);
    const auto sys = dyn::make_system(opt.prm);
    SweepResult res;
    res.threshold = opt.threshold > 0.0 ? opt.threshold : 1e-2 * dyn::ground_state_frequency(opt.prm);
    for (double e : opt.energies) {
        EnergySummary s;
        s.energy = e;
        if (const auto win = dyn::well_window(opt.prm, e)) {
            const auto seeds = dyn::seed_on_section(sys, e, *win, opt.n_q, opt.n_p);
            for (std::size_t i = 0; i < seeds.size(); ++i)
                res.cells.push_back(SweepCell{e, static_cast<int>(i), seeds[i], dyn::OrbitClass::bound_regular, 0.0});
            s.seeds = static_cast<int>(seeds.size());
        }
        res.energies.push_back(s);
    }
    dyn::MleOptions mo;
    mo.t_end = opt.t_end;
    mo.dt = opt.dt;
    parallel_for(res.cells.size(), opt.workers, [&](std::size_t i) {
        SweepCell& cell = res.cells[i];
        const dyn::MleResult m = dyn::mle(sys, cell.state, mo);
        cell.mle = m.last_quarter_mean;
        cell.orbit_class = dyn::classify(dyn::Termination::completed, m, res.threshold);
    });
    for (auto& s : res.energies) {
        for (const auto& cell : res.cells) {
            if (cell.energy != s.energy) continue;
            switch (cell.orbit_class) {
                case dyn::OrbitClass::bound_regular: ++s.regular; break;
                case dyn::OrbitClass::bound_chaotic: ++s.chaotic; break;
                case dyn::OrbitClass::collapse: ++s.collapse; break;
                case dyn::OrbitClass::escape: ++s.escape; break;
            }
        }
        s.island_fraction = s.seeds > 0 ? static_cast<double>(s.regular) / s.seeds : 0.0;
    }
    return res;
}

}  // namespace lrbec::cli
