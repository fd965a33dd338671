#include <fstream>

#include "doctest.h"
#include "nsrlab/config.hpp"

using namespace nsr;
using nlohmann::json;

namespace {

json small_doc() {
    std::ifstream in(NSRLAB_SOURCE_DIR "/configs/small.json");
    return json::parse(in, nullptr, true, true);
}

std::string failing_field(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.field;
    }
    return "";
}

}  // namespace

TEST_CASE("shipped configs load") {
    for (const char* name : {"small.json", "reference.json", "two_level.json"}) {
        CAPTURE(name);
        const RunConfig cfg = load_config(std::string(NSRLAB_SOURCE_DIR "/configs/") + name);
        CHECK(cfg.hash.size() == 64);
        CHECK_FALSE(cfg.schedule.desk.empty());
    }
}

TEST_CASE("config errors name the offending field") {
    json doc = small_doc();
    doc["lattice"]["n_space"] = 32;
    CHECK(failing_field(doc) == "lattice.n_space");

    doc = small_doc();
    doc["lattice"]["n_time"] = 4;
    CHECK(failing_field(doc) == "lattice.n_time");

    doc = small_doc();
    doc["nu"] = -1.0;
    CHECK(failing_field(doc) == "nu");

    doc = small_doc();
    doc["schedule"]["desk"][0].erase("ell");
    CHECK(failing_field(doc).find("ell") != std::string::npos);

    doc = small_doc();
    doc["energy"]["kind"] = "quadratic";
    CHECK(failing_field(doc) == "energy.kind");
}

TEST_CASE("unknown keys are rejected") {
    json doc = small_doc();
    doc["lattice"]["n_spcae"] = 33;
    CHECK(failing_field(doc) == "lattice.n_spcae");
    doc = small_doc();
    doc["extra"] = 1;
    CHECK(failing_field(doc) == "extra");
}

TEST_CASE("config hash is stable and tracks the seed") {
    const RunConfig a = parse_config(small_doc());
    const RunConfig b = parse_config(small_doc());
    CHECK(a.hash == b.hash);
    CHECK(a.hash == sha256_hex(a.canonical.dump()));

    RunConfig c = parse_config(small_doc());
    override_seed(c, 7);
    CHECK(c.hash != a.hash);
    CHECK(c.seed == 7);
    CHECK(c.decorrelation.seed == 7);
    CHECK(c.commutator.seed == 7);

    json doc = small_doc();
    doc["seed"] = 7;
    CHECK(parse_config(doc).hash == c.hash);
}

TEST_CASE("sha256 of a known string") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
