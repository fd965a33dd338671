#pragma once
// Binary field snapshots: "NSRF" plus a one-byte format version ('1'), int64 components,
// n_space, n_time, float64 T, int64 flags, then complex128 coefficients over the full
// -K..K cube, looped as component, k3, k2, k1, t (t fastest). Little-endian throughout.
// Reading restores the stored half spectrum entry by entry, so a round trip is bit-exact.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "nsrlab/field.hpp"

namespace nsr {

class SnapshotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_snapshot(const std::string& path, const FourierField& f);
FourierField read_snapshot(const std::string& path);

void write_field(std::ostream& out, const FourierField& f);
// what names the source in error messages.
FourierField read_field(std::istream& in, const std::string& what);

}  // namespace nsr
