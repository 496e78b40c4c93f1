#include "lrbec/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include "lrbec/errors.hpp"

#ifndef LRBEC_VERSION
#define LRBEC_VERSION "unknown"
#endif

namespace lrbec::cli {

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["schema"] = "lrbec-manifest/1";
    j["command_line"] = command_line;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["parameters"] = parameters;
    j["tolerances"] = tolerances;
    j["integrator"] = integrator;
    j["version"] = version;
    j["started"] = started;
    j["finished"] = finished;
    j["wall_seconds"] = wall_seconds;
    j["termination"] = termination;
    j["summary"] = summary;
    j["outputs"] = outputs;
    return j;
}

const char* version() { return LRBEC_VERSION; }

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
    return std::filesystem::path(output.string() + ".manifest.json");
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    // "x" makes creation fail if the file already exists.
    std::FILE* f = std::fopen(path.c_str(), "wx");
    if (!f) throw ConfigError("manifest " + path.string() + " already exists or cannot be created");
    const std::string text = m.to_json().dump(2) + "\n";
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    if (std::fclose(f) != 0 || !ok) throw ConfigError("failed to write manifest " + path.string());
}

}  // namespace lrbec::cli
