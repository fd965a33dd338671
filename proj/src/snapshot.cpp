#include "nsrlab/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace nsr {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {
constexpr char kMagic[4] = {'N', 'S', 'R', 'F'};
constexpr char kVersion = '1';
constexpr std::int64_t kFlagMeanFree = 1;
constexpr std::int64_t kFlagTraceFree = 2;

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& what) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw SnapshotError("snapshot truncated: " + what);
    return v;
}
}  // namespace

void write_field(std::ostream& out, const FourierField& f) {
    const Lattice& lat = f.lattice();
    out.write(kMagic, 4);
    out.put(kVersion);
    put<std::int64_t>(out, f.components());
    put<std::int64_t>(out, lat.n_space);
    put<std::int64_t>(out, lat.n_time);
    put<double>(out, lat.T);
    put<std::int64_t>(out, (f.mean_free ? kFlagMeanFree : 0) | (f.trace_free ? kFlagTraceFree : 0));
    const int K = lat.K();
    for (int c = 0; c < f.components(); ++c)
        for (int k3 = -K; k3 <= K; ++k3)
            for (int k2 = -K; k2 <= K; ++k2)
                for (int k1 = -K; k1 <= K; ++k1)
                    for (int t = 0; t < lat.n_time; ++t) {
                        const cplx v = f.mode(c, t, k1, k2, k3);
                        put<double>(out, v.real());
                        put<double>(out, v.imag());
                    }
}

FourierField read_field(std::istream& in, const std::string& what) {
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw SnapshotError("corrupt snapshot header: " + what);
    if (magic[4] != kVersion)
        throw SnapshotError("snapshot version mismatch in " + what + ": found '" + std::string(1, magic[4]) +
                            "', expected '" + std::string(1, kVersion) + "'");
    const auto comps = get<std::int64_t>(in, what);
    Lattice lat;
    const auto n_space = get<std::int64_t>(in, what);
    const auto n_time = get<std::int64_t>(in, what);
    lat.T = get<double>(in, what);
    const auto flags = get<std::int64_t>(in, what);
    if (comps != 1 && comps != 3 && comps != 6) throw SnapshotError("corrupt snapshot header (components): " + what);
    if (n_space < 1 || n_space > 4097 || n_time < 1 || n_time > 100000)
        throw SnapshotError("corrupt snapshot header (lattice): " + what);
    lat.n_space = static_cast<int>(n_space);
    lat.n_time = static_cast<int>(n_time);
    try {
        lat.validate();
    } catch (const std::exception& e) {
        throw SnapshotError("corrupt snapshot header: " + what + ": " + e.what());
    }
    FourierField f(lat, static_cast<int>(comps));
    const int K = lat.K();
    for (int c = 0; c < comps; ++c)
        for (int k3 = -K; k3 <= K; ++k3)
            for (int k2 = -K; k2 <= K; ++k2)
                for (int k1 = -K; k1 <= K; ++k1)
                    for (int t = 0; t < lat.n_time; ++t) {
                        const double re = get<double>(in, what);
                        const double im = get<double>(in, what);
                        if (k3 >= 0) f.slab(c, t)[f.idx(k1, k2, k3)] = cplx(re, im);
                    }
    f.mean_free = flags & kFlagMeanFree;
    f.trace_free = flags & kFlagTraceFree;
    return f;
}

void write_snapshot(const std::string& path, const FourierField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SnapshotError("cannot open for writing: " + path);
    write_field(out, f);
    if (!out) throw SnapshotError("write failed: " + path);
}

FourierField read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("cannot open snapshot: " + path);
    return read_field(in, path);
}

}  // namespace nsr
