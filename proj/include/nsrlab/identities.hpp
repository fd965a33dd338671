#pragma once
// The exact-identity suite: building-block normalizations, Beltrami and transport
// identities, the geometric decomposition, mean-tensor cancellation, frequency
// supports and the oscillation identity, each with a pinned tolerance.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "nsrlab/geometry.hpp"

namespace nsr {

struct IdentityCheck {
    std::string id;    // a .. g
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool ok = false;
    std::string detail;
    nlohmann::json to_json() const;
};

struct IdentityOptions {
    int n_space = 129;
    int n_time = 3;
    double T = 0.1;
    int lambda = 35;  // multiple of N_Lambda
    int lambda_sigma = 1;
    int r = 1;
    double mu = 4.0;
    std::vector<int> dirichlet_r{2, 4, 8};
    int gamma_samples = 1000;
    std::uint64_t seed = 20240601;
};

struct IdentitySuite {
    std::vector<IdentityCheck> checks;
    bool all_ok = false;
    nlohmann::json to_json() const;
};

IdentitySuite verify_identities(const DirectionSet& dirs, const IdentityOptions& opt = {});

}  // namespace nsr
