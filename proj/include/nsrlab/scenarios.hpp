#pragma once
// Scenario runner behind the lab command. Each scenario returns a report and the
// list of asserted invariants; measured-only quantities sit in the report and
// never fail a run.

#include <string>
#include <vector>

#include "json.hpp"

#include "nsrlab/config.hpp"

namespace nsr {

struct Assertion {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct ScenarioResult {
    std::string scenario;
    nlohmann::json results;
    std::vector<Assertion> assertions;
    std::vector<std::string> artifacts;  // file names inside the output directory
    bool passed() const;
    // Full report: version, config hash, seed, results, assertions and status.
    nlohmann::json report(const RunConfig& cfg) const;
};

const std::vector<std::string>& scenario_names();

struct RunContext {
    std::string out_dir;  // empty: no artifacts are written
    int steps = 0;        // multi-step count; 0 takes the config value
};

// Throws ConfigError for an unknown scenario or a config that cannot serve it,
// anything else for runtime failures. Writes report.json when out_dir is set.
ScenarioResult run_scenario(const std::string& scenario, const RunConfig& cfg, const RunContext& ctx);

// Direction set with eps_gamma estimated from the config seed.
DirectionSet directions_for(const RunConfig& cfg);
IterationState initial_state(const RunConfig& cfg);

}  // namespace nsr
