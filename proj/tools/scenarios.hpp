#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qdyn::cli {

/// Bad command line, unknown scenario, unknown or out-of-range config key.
/// Maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioRequest {
    std::string name;
    std::optional<std::filesystem::path> config_file;
    std::vector<std::pair<std::string, std::string>> overrides;  // --set key=value
    std::optional<std::uint64_t> seed;                           // --seed (root seed)
    std::filesystem::path out_dir = ".";
    bool plots = false;
};

struct ScenarioReport {
    bool pass = false;
    std::string failed_metric;  // set when pass == false
    std::map<std::string, double> metrics;
    std::uint64_t seed = 0;  // the seed the scenario actually used
    double elapsed_s = 0.0;
};

/// Runs a scenario end to end: merges configuration, executes, writes
/// <name>.csv and <name>.summary.json (plus SVG plots when requested) into
/// out_dir. Throws UsageError for invalid requests.
ScenarioReport run_scenario(const ScenarioRequest& request);

/// (name, one-line description) for every registered scenario.
std::vector<std::pair<std::string, std::string>> list_scenarios();

}  // namespace qdyn::cli
