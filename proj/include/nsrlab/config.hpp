#pragma once
// Run configuration: a JSON document validated field by field before any
// computation, plus its canonical form and SHA-256 hash for reports.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "nsrlab/analysis.hpp"
#include "nsrlab/energy.hpp"
#include "nsrlab/identities.hpp"
#include "nsrlab/iteration.hpp"

namespace nsr {

inline constexpr const char* kLabVersion = "nsrlab 0.1.0";

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& why)
        : std::runtime_error("config field '" + field + "': " + why), field(field) {}
    std::string field;
};

struct InitialSpec {
    enum class Kind { zero, prescribed, state_file };
    Kind kind = Kind::zero;
    InitialData data;
    std::string state_file;
};

// u = amplitude * ABC flow at unit wavenumber (an exact stationary Euler solution).
struct EulerSpec {
    double amplitude = 1.0;
    int level = 0;  // selects lambda_n = desk[level].lambda_q
};

struct Tolerances {
    double residual = 1e-8;
    double divergence = 1e-9;
    double contraction = 0.5;  // measured; asserted only by the acceptance suite
    double inflation = 4.0;
};

struct RunConfig {
    std::uint64_t seed = 20240601;
    Lattice lattice{33, 9, 0.02};
    double nu = 1e-3;
    int direction_families = 2;
    InitialSpec initial;
    EulerSpec euler;
    ParameterSchedule schedule;
    EnergyProfile energy;
    StepOptions step;
    int steps = 1;  // multi-step count
    IdentityOptions identities;
    CorpusOptions decorrelation;
    CommutatorStudyOptions commutator;
    ScalingOptions scaling;
    int audit_level = 0;
    Tolerances tol;

    nlohmann::json canonical;  // parsed document with the effective seed
    std::string hash;          // SHA-256 of canonical.dump()
};

// base_dir resolves relative file references (sample files, state files).
RunConfig parse_config(const nlohmann::json& doc, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
// Replaces the seed everywhere it feeds a generator and refreshes the hash.
void override_seed(RunConfig& cfg, std::uint64_t seed);

std::string sha256_hex(const std::string& bytes);

}  // namespace nsr
