#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lrbec/experiments.hpp"

namespace fs = std::filesystem;

namespace {

struct Sandbox {
    fs::path dir;
    Sandbox() {
        dir = fs::temp_directory_path() / ("lrbec_cli_" + std::to_string(std::rand()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }

    int run(const std::string& args, const std::string& env = "") const {
        const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" LRBEC_CLI_PATH "' " + args + " 2>/dev/null";
        const int st = std::system(cmd.c_str());
        return WEXITSTATUS(st);
    }

    std::string read(const std::string& name) const {
        std::ifstream in(dir / name, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
};

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string l; std::getline(ss, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("schema rejects unknown keys and wrong types") {
    using lrbec::cli::resolve;
    CHECK_THROWS(resolve("portrait", {{"bogus", 1}}));
    CHECK_THROWS(resolve("portrait", {{"n_orbits", 1.5}}));
    CHECK_THROWS(resolve("nonsense", nlohmann::json::object()));
    const auto c = resolve("portrait", {{"a", -1}});
    CHECK(c["a"].get<double>() == -1.0);
    CHECK(c.contains("t_end"));
    for (const auto& sub : lrbec::cli::subcommands()) CHECK_NOTHROW(resolve(sub, nlohmann::json::object()));
}

TEST_CASE("bifurcate-mono ends at the variational fold") {
    Sandbox sb;
    REQUIRE(sb.run("bifurcate-mono --scaled --a-min -1.3 --a-max -0.2 --a-steps 23") == 0);
    const auto rows = lines(sb.read("bifurcate-mono.tsv"));
    REQUIRE(rows.size() > 2);
    CHECK(rows[0] == "a\tbranch_id\tq_star\tenergy\tmu\tkind");
    double a_min = 0.0;
    bool degenerate = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double a = std::stod(rows[i].substr(0, rows[i].find('\t')));
        a_min = std::min(a_min, a);
        degenerate |= rows[i].find("degenerate") != std::string::npos;
    }
    CHECK(std::abs(a_min + 3.0 * 3.14159265358979323846 / 8.0) < 1e-6);
    CHECK(degenerate);
    const auto manifest = nlohmann::json::parse(sb.read("bifurcate-mono.tsv.manifest.json"));
    CHECK(manifest["outputs"][0] == "bifurcate-mono.tsv");
    CHECK(manifest["config"]["a_steps"] == 23);
    CHECK(manifest.contains("version"));
    // Manifests are write-once.
    CHECK(sb.run("bifurcate-mono --scaled --a-steps 23") == 1);
}

TEST_CASE("exit codes") {
    Sandbox sb;
    std::ofstream(sb.dir / "bad.json") << R"({"no_such_key": 3})";
    CHECK(sb.run("landscape --config bad.json") == 1);
    CHECK(sb.run("landscape --n-rho notanumber") == 1);
    CHECK(sb.run("stationary --a -1.3 --output s.tsv") == 2);
    CHECK_FALSE(fs::exists(sb.dir / "s.tsv.manifest.json"));
}

TEST_CASE("config file overrides flags") {
    Sandbox sb;
    std::ofstream(sb.dir / "c.json") << R"({"n_rho": 3, "n_z": 2, "scaled": true})";
    REQUIRE(sb.run("landscape --n-rho 50 --config c.json --output l.tsv") == 0);
    CHECK(lines(sb.read("l.tsv")).size() == 7);
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
    Sandbox sb;
    const std::string args = "poincare --scaled --n-q 3 --n-p 3 --n-crossings 20";
    REQUIRE(sb.run(args + " --output a.tsv", "LRBEC_WORKERS=1") == 0);
    REQUIRE(sb.run(args + " --output b.tsv", "LRBEC_WORKERS=4") == 0);
    const auto a = sb.read("a.tsv");
    CHECK(a.size() > 100);
    CHECK(a == sb.read("b.tsv"));
    CHECK(lines(a)[0] == "orbit_id\tt\tre_a_rho\tim_a_rho\ttermination");
}

TEST_CASE("stationary writes a table, a summary and a checkpoint") {
    Sandbox sb;
    REQUIRE(sb.run("stationary --a -0.85 --branch unstable --checkpoint u.bin") == 0);
    const auto rows = lines(sb.read("stationary.tsv"));
    CHECK(rows[0] == "r\tre_psi\tim_psi\tU");
    CHECK(rows.size() == 2048);
    const auto summary = nlohmann::json::parse(sb.read("stationary.tsv.summary.json"));
    CHECK(summary["branch"] == "unstable");
    CHECK(summary["residual"].get<double>() < 1e-6);
    CHECK(fs::exists(sb.dir / "u.bin"));
    REQUIRE(sb.run("evolve --initial-checkpoint u.bin --t-end 0.05 --output e.tsv") == 0);
    const auto m = nlohmann::json::parse(sb.read("e.tsv.manifest.json"));
    CHECK(m["termination"] == "completed");
}

TEST_CASE("empty energy shell gives an empty sweep") {
    lrbec::cli::SweepOptions opt;
    opt.energies = {1e5};
    const auto r = lrbec::cli::classify_sweep(opt);
    CHECK(r.cells.empty());
    REQUIRE(r.energies.size() == 1);
    CHECK(r.energies[0].seeds == 0);
    CHECK(r.energies[0].island_fraction == 0.0);
}
