#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace lrbec::cli {

/// Sidecar record of one run. Serialized as JSON next to the primary output.
struct RunManifest {
    std::string command_line;
    std::string subcommand;
    nlohmann::json config;      ///< resolved configuration, every key present
    nlohmann::json parameters;  ///< scaled parameters actually used
    nlohmann::json tolerances;
    nlohmann::json integrator;
    std::string version;
    std::string started;   ///< UTC, ISO 8601
    std::string finished;
    double wall_seconds = 0.0;
    std::string termination = "completed";
    nlohmann::json summary;  ///< subcommand-specific results
    std::vector<std::string> outputs;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Build version from git describe at configure time.
const char* version();

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_now();

/// Manifest path belonging to a primary output file.
std::filesystem::path manifest_path(const std::filesystem::path& output);

/// Creates the manifest file; refuses to replace an existing one.
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

}  // namespace lrbec::cli
