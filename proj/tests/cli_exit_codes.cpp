// Runs the lab binary and checks exit codes for the documented failure classes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace {

const std::string kLab = LAB_BINARY;
const std::string kConfigs = NSRLAB_SOURCE_DIR "/configs/";

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + kLab + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string temp_file(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / ("nsrlab_cli_" + name);
    std::ofstream(path) << body;
    return path.string();
}

}  // namespace

TEST_CASE("passing scenario exits 0") { CHECK(run("audit --config " + kConfigs + "small.json") == 0); }

TEST_CASE("config errors exit 2") {
    CHECK(run("audit --config /nonexistent/config.json") == 2);
    CHECK(run("audit --config " + temp_file("syntax.json", "{\"seed\": ")) == 2);
    CHECK(run("audit --config " + temp_file("unknown.json", "{\"sede\": 1}")) == 2);
    CHECK(run("no-such-scenario --config " + kConfigs + "small.json") == 2);
    CHECK(run("audit") == 2);
    CHECK(run("audit --config " + kConfigs + "small.json", "LAB_THREADS=zero") == 2);
    CHECK(run("audit --config " + kConfigs + "small.json --threads 0") == 2);
    CHECK(run("audit 3 --config " + kConfigs + "small.json") == 2);
}

TEST_CASE("runtime errors exit 3") {
    // a state file that is not a snapshot fails while loading, after validation
    const std::string junk = temp_file("junk.nsrs", "not a state");
    const std::string cfg = temp_file("state.json", R"({"lattice": {"n_space": 9, "n_time": 5, "T": 0.02},
        "initial": {"kind": "state_file", "path": ")" + junk + R"("},
        "schedule": {"desk": [{"lambda_q": 5, "delta_q": 1, "lambda_next": 10, "delta_next": 1,
                               "delta_next2": 0.6, "ell": 0.05}]}})");
    CHECK(run("one-step --config " + cfg) == 3);
}

TEST_CASE("version flag") { CHECK(run("--version") == 0); }
