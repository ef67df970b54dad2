#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scenarios.hpp"

namespace {

int run_command(const qdyn::cli::ScenarioRequest& request) {
    const qdyn::cli::ScenarioReport report = qdyn::cli::run_scenario(request);
    for (const auto& [key, value] : report.metrics) {
        std::printf("  %-26s %.6g\n", key.c_str(), value);
    }
    if (report.pass) {
        std::printf("[PASS] %s (%.2f s)\n", request.name.c_str(), report.elapsed_s);
        return 0;
    }
    std::printf("[FAIL] %s: metric '%s' violates its pass condition (%.2f s)\n",
                request.name.c_str(), report.failed_metric.c_str(), report.elapsed_s);
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qdyn - quantum dynamics and pulse-optimization scenario runner"};
    app.require_subcommand(1);

    auto* list_cmd = app.add_subcommand("list", "List available scenarios");

    qdyn::cli::ScenarioRequest request;
    std::string config_path;
    std::vector<std::string> sets;
    std::uint64_t seed_value = 0;

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its artifacts");
    run_cmd->add_option("scenario", request.name, "Scenario name (see `qdyn list`)")->required();
    run_cmd->add_option("--config", config_path, "JSON file with parameter overrides");
    auto* set_opt =
        run_cmd->add_option("--set", sets, "Override a single key, e.g. --set T=20 (repeatable)");
    auto* seed_opt = run_cmd->add_option("--seed", seed_value, "Root seed for stochastic pieces");
    run_cmd->add_option("--out", request.out_dir, "Output directory (default: current)");
    run_cmd->add_flag("--plots", request.plots, "Also render SVG plots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list_cmd->parsed()) {
            for (const auto& [name, description] : qdyn::cli::list_scenarios()) {
                std::printf("%-18s %s\n", name.c_str(), description.c_str());
            }
            return 0;
        }

        if (!config_path.empty()) request.config_file = config_path;
        if (seed_opt->count() > 0) request.seed = seed_value;
        for (const std::string& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw qdyn::cli::UsageError("--set expects key=value, got '" + kv + "'");
            }
            request.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        }
        (void)set_opt;
        return run_command(request);
    } catch (const qdyn::cli::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
