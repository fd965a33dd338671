#pragma once
// Iteration states on disk: "NSRS" plus a one-byte format version ('1'), int64 q,
// float64 nu, then the v, p and R fields in the field snapshot format.

#include <string>

#include "nsrlab/iteration.hpp"
#include "nsrlab/snapshot.hpp"

namespace nsr {

void save_state(const std::string& path, const IterationState& s);
// Throws SnapshotError on a corrupt header, a version mismatch or truncation.
IterationState load_state(const std::string& path);

}  // namespace nsr
