#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "nsrlab/state_io.hpp"

using namespace nsr;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("nsrlab_" + name)).string();
}

IterationState sample_state() {
    Lattice lat{9, 5, 0.1};
    InitialData d{0.7, 0.3, 2.0, 0.2};
    IterationState s = prescribed_state(lat, 0.05, d);
    s.q = 3;
    // a deliberately non-Hermitian entry on the k3 = 0 plane must survive as stored
    s.v.slab(1, 2)[s.v.idx(2, -1, 0)] += cplx(1e-13, -3e-14);
    return s;
}

bool bitwise_equal(const FourierField& a, const FourierField& b) {
    return a.lattice() == b.lattice() && a.components() == b.components() && a.mean_free == b.mean_free &&
           a.trace_free == b.trace_free &&
           std::memcmp(a.raw().data(), b.raw().data(), a.raw().size() * sizeof(cplx)) == 0;
}

std::vector<char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("field snapshot round trip is bitwise") {
    const IterationState s = sample_state();
    const std::string path = temp_path("field.bin");
    write_snapshot(path, s.R);
    CHECK(bitwise_equal(read_snapshot(path), s.R));
    write_snapshot(path, s.v);
    CHECK(bitwise_equal(read_snapshot(path), s.v));
    std::remove(path.c_str());
}

TEST_CASE("state round trip is bitwise and keeps the residual") {
    const IterationState s = sample_state();
    const std::string path = temp_path("state.bin");
    save_state(path, s);
    const IterationState t = load_state(path);
    CHECK(t.q == s.q);
    CHECK(t.nu == s.nu);
    CHECK(bitwise_equal(t.v, s.v));
    CHECK(bitwise_equal(t.p, s.p));
    CHECK(bitwise_equal(t.R, s.R));
    const ResidualResult before = nsr_residual(s.v, s.p, s.R, s.nu);
    const ResidualResult after = nsr_residual(t.v, t.p, t.R, t.nu);
    CHECK(before.relative == after.relative);
    CHECK(before.absolute == after.absolute);
    std::remove(path.c_str());
}

TEST_CASE("truncated or foreign state files are rejected") {
    const IterationState s = sample_state();
    const std::string path = temp_path("state_bad.bin");
    save_state(path, s);
    const std::vector<char> bytes = slurp(path);

    for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{9}, std::size_t{30}, bytes.size() / 2,
                            bytes.size() - 1}) {
        spit(path, std::vector<char>(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut)));
        CHECK_THROWS_AS(load_state(path), SnapshotError);
    }

    std::vector<char> wrong_version = bytes;
    wrong_version[4] = '2';
    spit(path, wrong_version);
    try {
        load_state(path);
        FAIL("expected a version mismatch");
    } catch (const SnapshotError& e) {
        CHECK(std::string(e.what()).find("version mismatch") != std::string::npos);
    }

    std::vector<char> garbage = bytes;
    garbage[0] = 'X';
    spit(path, garbage);
    CHECK_THROWS_AS(load_state(path), SnapshotError);

    // a field snapshot is not a state
    write_snapshot(path, s.v);
    CHECK_THROWS_AS(load_state(path), SnapshotError);
    CHECK_THROWS_AS(load_state(temp_path("does_not_exist.bin")), SnapshotError);
    std::remove(path.c_str());
}
