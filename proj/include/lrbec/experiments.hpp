#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrbec/dynamics.hpp"
#include "lrbec/units.hpp"

namespace lrbec::cli {

enum class KeyType { number, integer, boolean, string, number_list };

struct Key {
    std::string name;
    KeyType type = KeyType::number;
    nlohmann::json fallback;
    std::string help;
};

/// Subcommand names in a fixed order.
const std::vector<std::string>& subcommands();

/// Every configuration key a subcommand accepts, with its default.
const std::vector<Key>& schema(const std::string& subcommand);

/// Defaults overlaid with the given keys. Unknown keys and type mismatches throw
/// ConfigError before any computation runs.
nlohmann::json resolve(const std::string& subcommand, const nlohmann::json& overrides);

/// Exit status of a run.
enum Exit : int { ok = 0, schema_error = 1, domain_error = 2 };

/// Runs a subcommand on a resolved or partial configuration. Writes the primary
/// table to config["output"], any secondary files next to it, and the manifest
/// last. Diagnostics go to `err`.
int run(const std::string& subcommand, const nlohmann::json& config, const std::string& command_line,
        std::ostream& err);

// ----- orbit-class sweep ---------------------------------------------------

struct SweepOptions {
    DipolarScaled prm{3.4e4, 6.0, 0.1};
    std::vector<double> energies;
    int n_q = 17;
    int n_p = 17;
    double t_end = 2000.0;  ///< Lyapunov run length, time units
    double dt = 1e-3;
    double threshold = 0.0;  ///< MLE threshold; 0 picks 1e-2 times the ground-state frequency
    int workers = 1;
};

struct SweepCell {
    double energy = 0.0;
    int seed = 0;
    dyn::PhaseState state;
    dyn::OrbitClass orbit_class = dyn::OrbitClass::bound_regular;
    double mle = 0.0;
};

struct EnergySummary {
    double energy = 0.0;
    int seeds = 0;
    int regular = 0;
    int chaotic = 0;
    int collapse = 0;
    int escape = 0;
    double island_fraction = 0.0;  ///< regular / seeds, 0 for an empty shell
};

struct SweepResult {
    double threshold = 0.0;
    std::vector<SweepCell> cells;  ///< ordered by energy, then seed
    std::vector<EnergySummary> energies;
};

/// Classifies a grid of p_z = 0 section seeds in the ground-state well at each energy.
SweepResult classify_sweep(const SweepOptions& opt);

}  // namespace lrbec::cli
