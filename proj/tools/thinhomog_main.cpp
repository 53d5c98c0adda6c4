#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "thinhomog/cli.hpp"

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitSolverError = 3;

const char *command_help(const std::string &name) {
    if (name == "cell") return "effective coefficients (r, p, q) from the cell problem";
    if (name == "limit") return "1D effective problem on (0,1)";
    if (name == "direct") return "thin-domain problem at one epsilon";
    if (name == "converge") return "fiber averages vs the effective limit along an epsilon ladder";
    if (name == "perturb") return "domain-perturbation energies over a (delta, epsilon) grid";
    if (name == "layer") return "near-boundary energies over an (eta, epsilon) grid";
    return "effective-coefficient continuity along a delta ladder";
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"numerical bench for thin domains with oscillating boundaries"};
    app.set_version_flag("--version", thinhomog::kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir, fixed_timestamp;
    int threads = 0;
    double tol = 0;
    for (const auto &name : thinhomog::known_commands()) {
        CLI::App *sub = app.add_subcommand(name, command_help(name));
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (default: from config or '.')");
        sub->add_option("--threads", threads, "worker threads for independent solves");
        sub->add_option("--tol", tol, "relative residual target, in (0, 1e-6]");
        sub->add_option("--fixed-timestamp", fixed_timestamp,
                        "timestamp stamp for artifacts (reruns become byte-identical)");
    }
    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw thinhomog::ConfigError("cannot read config file: " + config_path);
        nlohmann::json cfg;
        try {
            in >> cfg;
        } catch (const nlohmann::json::exception &e) {
            throw thinhomog::ConfigError(std::string("config: invalid JSON: ") + e.what());
        }
        cfg["command"] = command;
        if (!out_dir.empty()) cfg["out"] = out_dir;
        if (threads > 0) cfg["threads"] = threads;
        if (tol > 0) cfg["tol"] = tol;
        if (!fixed_timestamp.empty()) cfg["timestamp"] = fixed_timestamp;

        thinhomog::RunConfig rc = thinhomog::parse_run_config(cfg);
        const auto t0 = std::chrono::steady_clock::now();
        thinhomog::RunResult res = thinhomog::run_command(rc);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        for (const auto &f : res.files) std::cout << "wrote " << f << "\n";
        std::cout << command << ": " << (res.exit_code == 0 ? "pass" : "FAIL") << " ("
                  << thinhomog::fmt_g(secs) << " s)\n";
        return res.exit_code == 0 ? 0 : kExitChecksFailed;
    } catch (const thinhomog::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const thinhomog::SolverError &e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolverError;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolverError;
    }
}
