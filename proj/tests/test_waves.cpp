#include <cmath>

#include "doctest.h"
#include "nsrlab/fft.hpp"
#include "nsrlab/spectral.hpp"
#include "nsrlab/waves.hpp"

using namespace nsr;

namespace {
double max_abs(const FourierField& a) {
    double m = 0.0;
    for (const cplx& x : a.raw()) m = std::max(m, std::abs(x));
    return m;
}
}  // namespace

TEST_CASE("Dirichlet kernel normalization") {
    for (int r : {1, 2, 4}) {
        Lattice lat{2 * r + 3, 1, 0.0};
        const FourierField D = dirichlet_kernel(lat, r);
        CHECK(std::abs(l2_norm(D) * l2_norm(D) - kTorusVolume) < 1e-10 * kTorusVolume);
    }
    Lattice lat{5, 1, 0.0};
    GridBuffer buf(8);
    to_physical(dirichlet_kernel(lat, 1), 0, 0, buf);
    CHECK(std::abs(buf.real()[0] - std::pow(3.0, 1.5)) < 1e-12);
    CHECK_THROWS(dirichlet_kernel(lat, 3));
}

TEST_CASE("wave parameter validation") {
    const DirectionSet dirs = build_direction_set(2);
    CHECK_THROWS(check_wave_params({12, 1, 1, 1.0}, dirs));
    CHECK_THROWS(check_wave_params({10, 0, 1, 1.0}, dirs));
    const WaveCheck ok = check_wave_params({35, 1, 1, 5.0}, dirs);
    CHECK(ok.annulus_ok);
    CHECK_FALSE(ok.sigma_r_ok);  // sigma r = 1/35 against c/(10 N) ~ 0.0102
    const WaveCheck big = check_wave_params({100, 1, 1, 5.0}, dirs);
    CHECK(big.sigma_r_ok);
}

TEST_CASE("eta: unit mean square, transport identity and symmetry") {
    const DirectionSet dirs = build_direction_set(2);
    Lattice lat{33, 4, 0.7};
    const WaveParams p{15, 1, 1, 3.0};
    for (const auto& d : {dirs.families[0].dirs[0], dirs.families[1].dirs[3]}) {
        const FourierField e = eta(lat, d, p, dirs.N_Lambda);
        for (int t = 0; t < lat.n_time; ++t)
            CHECK(std::abs(l2_norm_slice(e, t) * l2_norm_slice(e, t) / kTorusVolume - 1.0) < 1e-12);
        FourierField lhs = eta_time_derivative(lat, d, p, dirs.N_Lambda);
        lhs *= 1.0 / p.mu;
        const Vec3 xi = d.xi_d();
        FourierField rhs = FourierField(lat, 1);
        for (int i = 0; i < 3; ++i) {
            FourierField di = derivative(e, static_cast<Axis>(i), 1);
            di *= xi[i];
            rhs += di;
        }
        CHECK(max_abs(lhs - rhs) < 1e-13);
        const auto& fam = dirs.families[d.family];
        const Direction& opp = fam.opposite(d);
        const FourierField em = eta(lat, opp, p, dirs.N_Lambda);
        CHECK(max_abs(em - e) == 0.0);
        // along -xi the transport identity flips sign
        FourierField back(lat, 1);
        const Vec3 mxi = opp.xi_d();
        for (int i = 0; i < 3; ++i) {
            FourierField di = derivative(em, static_cast<Axis>(i), 1);
            di *= mxi[i];
            back += di;
        }
        CHECK(max_abs(lhs + back) < 1e-13);
    }
}

TEST_CASE("Beltrami pair: curl eigenfield, divergence free, unit pointwise product") {
    const DirectionSet dirs = build_direction_set(2);
    Lattice lat{31, 1, 0.0};
    for (const auto& fam : dirs.families) {
        CHECK(beltrami_eigen_residual(fam, 10) < 1e-14);
        for (int j = 0; j < 6; ++j) {
            const FourierField U = beltrami_pair(lat, fam.dirs[j], 10);
            FourierField lu = U;
            lu *= 10.0;
            CHECK(max_abs(curl(U) - lu) < 1e-13);
            CHECK(max_abs(divergence(U)) < 1e-13);
            const FourierField uu = dealiased_product(U, U, Contraction::dot).field;
            CHECK(std::abs(uu.mode(0, 0, 0, 0, 0) - 2.0) < 1e-13);
            const SparseScalar ww = dot_sparse(beltrami_sparse(fam.dirs[j], 10),
                                               beltrami_sparse(fam.opposite(fam.dirs[j]), 10));
            REQUIRE(ww.size() == 1);
            CHECK(ww.begin()->first == Key3{0, 0, 0});
            CHECK(std::abs(ww.begin()->second - 1.0) < 1e-15);
        }
    }
}

TEST_CASE("intermittent waves sit in the annulus and are real") {
    const DirectionSet dirs = build_direction_set(2);
    const WaveParams p{20, 1, 1, 2.0};
    Lattice lat{57, 2, 0.3};
    for (const auto& fam : dirs.families)
        for (const auto& d : fam.dirs) {
            const auto rad = support_radii(intermittent_sparse(d, p, dirs.N_Lambda, 0.1), 1e-14);
            CHECK(rad[0] >= p.lambda / 2.0);
            CHECK(rad[1] <= 2.0 * p.lambda);
        }
    const FourierField P = intermittent_pair(lat, dirs.families[0].dirs[1], p, dirs.N_Lambda);
    CHECK(max_abs(P - freq_project(freq_project(P, Band::at_most(2.0 * p.lambda)), Band::at_least(p.lambda / 2.0))) ==
          0.0);
    // a complex combination with conjugate-paired coefficients is real: its
    // half-spectrum storage reproduces the physical values exactly
    GridBuffer buf(fft_size_at_least(2 * lat.n_space));
    to_physical(P, 0, 1, buf);
    FourierField back(lat, 3);
    CHECK(from_physical(buf, back, 0, 1) < 1e-20);
    double worst = 0.0;
    for_each_mode(lat, [&](std::size_t idx, int, int, int) {
        worst = std::max(worst, std::abs(back.slab(0, 1)[idx] - P.slab(0, 1)[idx]));
    });
    CHECK(worst < 1e-13);
}

TEST_CASE("intermittent pair equals eta times the Beltrami pair outside the annulus regime") {
    // lambda xi is itself a frequency of eta here, so the pair has a mean
    const DirectionSet dirs = build_direction_set(1);
    const WaveParams p{5, 1, 2, 1.0};
    const Direction& d = dirs.families[0].dirs[0];
    const Lattice lat{2 * wave_bandwidth(d, p, dirs.N_Lambda) + 1, 1, 0.0};
    const FourierField P = intermittent_pair(lat, d, p, dirs.N_Lambda);
    const FourierField U = beltrami_pair(lat, d, p.lambda);
    const FourierField e = eta(lat, d, p, dirs.N_Lambda);
    const FourierField eU = dealiased_product(e, U, Contraction::scalar).field;
    CHECK(max_abs(P - eU) < 1e-15);
    const double ratio = l2_norm_slice(P, 0) / l2_norm_slice(e, 0);
    CHECK(std::abs(ratio - std::sqrt(2.0)) < 1e-13);
}

TEST_CASE("mean tensor identity and oscillation identity") {
    const DirectionSet dirs = build_direction_set(2);
    const WaveParams p{20, 1, 1, 2.0};
    Lattice lat{65, 2, 0.2};
    CHECK(mean_tensor_check(lat, dirs.families[0], p, dirs.N_Lambda, identity_sym()) < 1e-10);
    Sym3 R = identity_sym();
    R[1] += 0.4 * dirs.eps_gamma;
    R[5] -= 0.3 * dirs.eps_gamma;
    CHECK(mean_tensor_check(lat, dirs.families[1], p, dirs.N_Lambda, R) < 1e-10);
    CHECK(oscillation_identity_check(lat, dirs.families[0].dirs[2], p, dirs.N_Lambda) < 1e-9);
    CHECK(pair_identity_check(lat, dirs.families[0].dirs[0], dirs.families[0].dirs[2], p, dirs.N_Lambda) < 1e-9);
}
