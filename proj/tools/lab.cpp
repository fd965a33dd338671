// lab <scenario> [k] --config <file> [--out <dir>] [--threads N] [--seed S]
// Exit codes: 0 pass, 1 assertion failure, 2 config error, 3 runtime error.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "nsrlab/config.hpp"
#include "nsrlab/parallel.hpp"
#include "nsrlab/scenarios.hpp"

namespace {

constexpr int kPass = 0, kAssertion = 1, kConfig = 2, kRuntime = 3;

int threads_from_env() {
    const char* env = std::getenv("LAB_THREADS");
    if (!env || !*env) return 0;
    try {
        std::size_t used = 0;
        const int n = std::stoi(env, &used);
        if (used == std::string(env).size() && n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw nsr::ConfigError("LAB_THREADS", std::string("expected a positive integer, got '") + env + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convex-integration laboratory for the Navier-Stokes-Reynolds system"};
    app.set_version_flag("--version", nsr::kLabVersion);
    std::string scenario, config_path, out_dir;
    int steps = 0, threads = 0;
    std::uint64_t seed = 0;
    app.add_option("scenario", scenario, "Scenario to run")
        ->required()
        ->check(CLI::IsMember(nsr::scenario_names()));
    app.add_option("k", steps, "Number of steps for multi-step")->check(CLI::PositiveNumber);
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "Output directory for reports and artifacts");
    auto* threads_opt = app.add_option("--threads", threads, "Worker cap (default: LAB_THREADS)")
                            ->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized corpora");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kConfig;
    }

    nsr::RunConfig cfg;
    try {
        if (threads_opt->count() == 0) threads = threads_from_env();
        if (threads > 0) nsr::set_thread_count(threads);
        cfg = nsr::load_config(config_path);
        if (seed_opt->count() > 0) nsr::override_seed(cfg, seed);
        if (steps > 0 && scenario != "multi-step")
            throw nsr::ConfigError("k", "a step count is only accepted by multi-step");
    } catch (const nsr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }

    try {
        nsr::RunContext ctx;
        ctx.out_dir = out_dir;
        ctx.steps = steps;
        const nsr::ScenarioResult res = nsr::run_scenario(scenario, cfg, ctx);
        int failed = 0;
        for (const auto& a : res.assertions) {
            std::cout << (a.ok ? "PASS " : "FAIL ") << a.name;
            if (!a.detail.empty()) std::cout << "  (" << a.detail << ')';
            std::cout << '\n';
            failed += a.ok ? 0 : 1;
        }
        std::cout << scenario << ": " << res.assertions.size() - failed << '/' << res.assertions.size()
                  << " assertions passed, config " << cfg.hash.substr(0, 12) << '\n';
        if (out_dir.empty()) std::cout << res.report(cfg).dump(2) << '\n';
        return failed == 0 ? kPass : kAssertion;
    } catch (const nsr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kRuntime;
    }
}
