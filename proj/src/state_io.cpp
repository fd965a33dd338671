#include "nsrlab/state_io.hpp"

#include <cstring>
#include <fstream>

namespace nsr {

namespace {
constexpr char kMagic[4] = {'N', 'S', 'R', 'S'};
constexpr char kVersion = '1';
}  // namespace

void save_state(const std::string& path, const IterationState& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SnapshotError("cannot open for writing: " + path);
    out.write(kMagic, 4);
    out.put(kVersion);
    const std::int64_t q = s.q;
    out.write(reinterpret_cast<const char*>(&q), sizeof q);
    out.write(reinterpret_cast<const char*>(&s.nu), sizeof s.nu);
    write_field(out, s.v);
    write_field(out, s.p);
    write_field(out, s.R);
    if (!out) throw SnapshotError("write failed: " + path);
}

IterationState load_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("cannot open state: " + path);
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw SnapshotError("corrupt state header: " + path);
    if (magic[4] != kVersion)
        throw SnapshotError("state version mismatch in " + path + ": found '" + std::string(1, magic[4]) +
                            "', expected '" + std::string(1, kVersion) + "'");
    std::int64_t q = 0;
    double nu = 0.0;
    in.read(reinterpret_cast<char*>(&q), sizeof q);
    in.read(reinterpret_cast<char*>(&nu), sizeof nu);
    if (!in) throw SnapshotError("corrupt state header (truncated): " + path);
    if (q < 0 || q > 1000 || !(nu >= 0.0)) throw SnapshotError("corrupt state header (q, nu): " + path);
    FourierField v = read_field(in, path + " [v]");
    FourierField p = read_field(in, path + " [p]");
    FourierField R = read_field(in, path + " [R]");
    if (v.components() != 3 || p.components() != 1 || R.components() != 6)
        throw SnapshotError("corrupt state: unexpected component counts in " + path);
    if (!(v.lattice() == p.lattice()) || !(v.lattice() == R.lattice()))
        throw SnapshotError("corrupt state: lattices differ in " + path);
    IterationState s;
    s.q = static_cast<int>(q);
    s.nu = nu;
    s.v = std::move(v);
    s.p = std::move(p);
    s.R = std::move(R);
    return s;
}

}  // namespace nsr
