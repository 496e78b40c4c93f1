#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrbec/experiments.hpp"
#include "lrbec/manifest.hpp"

using nlohmann::json;
namespace cli = lrbec::cli;

namespace {

std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

json parse_value(const std::string& text, cli::KeyType type) {
    switch (type) {
        case cli::KeyType::number: return std::stod(text);
        case cli::KeyType::integer: return std::stoll(text);
        case cli::KeyType::boolean: return text == "true" || text == "1";
        case cli::KeyType::string: return text;
        case cli::KeyType::number_list: {
            json arr = json::array();
            std::stringstream ss(text);
            for (std::string item; std::getline(ss, item, ',');) arr.push_back(std::stod(item));
            return arr;
        }
    }
    return nullptr;
}

const std::map<std::string, std::string> kAbout{
    {"bifurcate-mono", "fixed points of the 1/r Gaussian over a scattering-length sweep"},
    {"bifurcate-dip", "fixed points of the dipolar Gaussian over a scattering-length sweep"},
    {"landscape", "dipolar variational potential on a (q_rho, q_z) raster"},
    {"portrait", "phase-space orbits of the 1/r Gaussian"},
    {"poincare", "p_z = 0 surface of section of the dipolar Gaussian"},
    {"stationary", "stationary state of the radial 1/r Gross-Pitaevskii equation"},
    {"evolve", "real-time evolution of a (stretched) radial state"},
    {"classify-sweep", "regular/chaotic/collapse classes of section seeds per energy"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational and grid mean-field analysis of condensates with long-range interactions"};
    app.set_version_flag("--version", std::string(cli::version()));
    app.require_subcommand(1);

    // Values as typed on the command line, keyed by subcommand then config key.
    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::map<std::string, bool>> flags;
    std::map<std::string, std::string> config_file;
    for (const auto& name : cli::subcommands()) {
        CLI::App* sub = app.add_subcommand(name, kAbout.at(name));
        sub->add_option("--config", config_file[name], "JSON file; its keys override flags");
        for (const auto& key : cli::schema(name)) {
            std::string help = key.help + " (default " + key.fallback.dump() + ")";
            if (key.type == cli::KeyType::boolean)
                sub->add_flag(flag_name(key.name), flags[name][key.name], help);
            else
                sub->add_option(flag_name(key.name), raw[name][key.name], help);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::Exit::schema_error;
    }

    std::string command_line;
    for (int i = 0; i < argc; ++i) command_line += (i ? " " : "") + std::string(argv[i]);

    for (const auto& name : cli::subcommands()) {
        const CLI::App* sub = app.get_subcommand(name);
        if (!sub->parsed()) continue;
        json overrides = json::object();
        try {
            for (const auto& key : cli::schema(name)) {
                if (sub->count(flag_name(key.name)) == 0) continue;
                overrides[key.name] = key.type == cli::KeyType::boolean ? json(flags[name][key.name])
                                                                         : parse_value(raw[name][key.name], key.type);
            }
            if (const auto& path = config_file[name]; !path.empty()) {
                std::ifstream in(path);
                if (!in) throw std::runtime_error("cannot read config " + path);
                const json file = json::parse(in);
                if (!file.is_object()) throw std::runtime_error("config must be a JSON object");
                for (const auto& [k, v] : file.items()) overrides[k] = v;
            }
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return cli::Exit::schema_error;
        }
        return cli::run(name, overrides, command_line, std::cerr);
    }
    return cli::Exit::schema_error;
}
