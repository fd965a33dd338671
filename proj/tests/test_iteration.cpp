#include <cmath>

#include "doctest.h"
#include "nsrlab/iteration.hpp"

using namespace nsr;

namespace {

DirectionSet certified_dirs() {
    DirectionSet dirs = build_direction_set(2);
    dirs.eps_gamma = estimate_epsilon_gamma(dirs, 20240601, 2000).eps;
    return dirs;
}

ParameterSchedule desk_schedule(int lambda, double mu, double ell, double delta_next, double delta_next2) {
    ParameterSchedule s;
    s.c0 = 6;
    DeskLevel L;
    L.lambda_q = 5.0;
    L.delta_q = 10.0 * delta_next;
    L.lambda_next = lambda;
    L.delta_next = delta_next;
    L.delta_next2 = delta_next2;
    L.ell = ell;
    L.sigma = 1.0 / lambda;
    L.r = 1;
    L.mu = mu;
    s.desk.push_back(L);
    return s;
}

double max_abs(const FourierField& a) {
    double m = 0.0;
    for (const cplx& x : a.raw()) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_CASE("schedule needs an override for super-exponential levels") {
    ParameterSchedule s;
    CHECK_THROWS_AS(s.level(0), std::domain_error);
    s = desk_schedule(25, 10.0, 0.05, 1.0, 0.5);
    const LevelParams L = s.level(0);
    CHECK(L.overridden);
    CHECK(L.waves.lambda == 25);
    CHECK(L.waves.lambda_sigma == 1);
    s.desk[0].sigma = 0.5 / 25.0;
    CHECK_THROWS_AS(s.level(0), std::invalid_argument);
    // small base and b = 1 keep every number finite
    ParameterSchedule tiny;
    tiny.a = 10;
    tiny.b = 1;
    const LevelParams T = tiny.level(0);
    CHECK(T.lambda_q == doctest::Approx(10.0));
    CHECK(T.ell == doctest::Approx(1e-20));
}

TEST_CASE("cutoff squares telescope to one with disjoint supports") {
    for (double y = 1.0; y < 5000.0; y *= 1.07) {
        double sum = 0.0;
        for (int i = 0; i < 12; ++i) sum += cutoff_squared(i, y);
        CHECK(std::abs(sum - 1.0) < 1e-14);
        for (int i = 0; i < 12; ++i)
            for (int j = i + 2; j < 12; ++j) CHECK(cutoff_squared(i, y) * cutoff_squared(j, y) == 0.0);
    }
    CHECK(cutoff_squared(0, 1.0) == 1.0);
    CHECK(cutoff_squared(0, 2.0) == 1.0);
    CHECK(cutoff_squared(0, 4.0) == 0.0);
    CHECK(cutoff_squared(1, 4.0) == 1.0);
}

TEST_CASE("stress cutoffs: zero stress and a synthetic large stress") {
    const Lattice lat{17, 5, 0.1};
    const ParameterSchedule sched = desk_schedule(5, 2.0, 0.05, 1.0, 0.5);
    const LevelParams L = sched.level(0);
    FourierField R(lat, 6);
    CutoffFamily cut = stress_cutoffs(R, L, sched, 3);
    CHECK(cut.count == 1);
    for (const auto& row : cut.nodes[0])
        for (double v : row) CHECK(v == 1.0);

    // stress magnitude up to ~ 60 scale units spreads over several cutoffs
    FourierField S = prescribed_stress(lat);
    S *= 60.0 * 100.0 * std::pow(L.lambda_q, -sched.eps_R) * L.delta_next;
    cut = stress_cutoffs(S, L, sched, 3);
    CHECK(cut.count >= 3);
    CHECK(cut.partition_residual < 1e-10);
    CHECK(cut.disjointness == 0.0);
    for (int i = 1; i < cut.count; ++i) {
        double l1 = 0.0;
        for (double v : cut.nodes[i][0]) l1 += v;
        l1 *= kTorusVolume / cut.nodes[i][0].size();
        MESSAGE("cutoff " << i << ": ||chi||_L1 4^i = " << l1 * std::pow(4.0, i));
    }
}

TEST_CASE("amplitudes at zero stress are uniform") {
    const Lattice lat{17, 5, 0.1};
    const DirectionSet dirs = certified_dirs();
    const ParameterSchedule sched = desk_schedule(5, 2.0, 0.05, 1.0, 0.5);
    const CutoffFamily cut = stress_cutoffs(FourierField(lat, 6), sched.level(0), sched, 2);
    const double rho = 0.3;
    const AmplitudeSet a = amplitudes(cut, std::vector<double>(lat.n_time, rho), dirs, lat);
    REQUIRE(a.families_used.size() == 1);
    const std::array<double, 12> g = gamma(identity_sym(), dirs.families[0]);
    for (int k = 0; k < 6; ++k) {
        const FourierField& f = a.a[0][k];
        for (int t = 0; t < lat.n_time; ++t) {
            CHECK(std::abs(f.mode(0, t, 0, 0, 0) - std::sqrt(rho) * g[k]) < 1e-13);
            CHECK(std::abs(f.mode(0, t, 1, 0, 0)) < 1e-13);
        }
    }
    CHECK(a.wwid_node_residual < 1e-12);
}

TEST_CASE("amplitude reconstruction identity on a small stress") {
    const Lattice lat{17, 5, 0.1};
    const DirectionSet dirs = certified_dirs();
    const ParameterSchedule sched = desk_schedule(5, 2.0, 0.05, 1.0, 0.5);
    FourierField S = prescribed_stress(lat);
    S *= 0.05;
    const CutoffFamily cut = stress_cutoffs(S, sched.level(0), sched, 2);
    const AmplitudeSet a = amplitudes(cut, std::vector<double>(lat.n_time, 1.0), dirs, lat);
    CHECK(a.wwid_node_residual < 1e-8);
    MESSAGE("max ||a||_inf / rho^{1/2} = " << a.a_constant);
    CHECK_THROWS_AS(amplitudes(cut, std::vector<double>(lat.n_time, 0.1), dirs, lat), GammaDomainViolation);
}

TEST_CASE("perturbation: zero amplitudes and the divergence-free assembly") {
    const Lattice lat{25, 5, 0.02};
    const DirectionSet dirs = certified_dirs();
    const ParameterSchedule sched = desk_schedule(5, 4.0, 0.05, 1.0, 0.5);
    const LevelParams L = sched.level(0);
    const CutoffFamily cut0 = stress_cutoffs(FourierField(lat, 6), L, sched, 1);
    const AmplitudeSet zero = amplitudes(cut0, std::vector<double>(lat.n_time, 0.0), dirs, lat);
    const Perturbation p0 = assemble_perturbation(zero, dirs, L.waves, lat);
    CHECK(max_abs(p0.w) == 0.0);

    FourierField S = prescribed_stress(lat);
    S *= 0.02;
    const CutoffFamily cut = stress_cutoffs(S, L, sched, 1);
    const AmplitudeSet a = amplitudes(cut, std::vector<double>(lat.n_time, 1.0), dirs, lat);
    const Perturbation p = assemble_perturbation(a, dirs, L.waves, lat);
    CHECK(p.div_residual < 1e-10);
    CHECK(p.curl_form_residual < 1e-10);
    CHECK(p.div_w_residual < 1e-9);
    CHECK(l2_norm(p.wp) > 0.0);
    const PeanutsCheck pc = peanuts_check(a, dirs, L.waves, lat, p.wt);
    CHECK(pc.residual < 1e-8);
}

TEST_CASE("mollify_state: zero input and vanishing commutator") {
    const Lattice lat{9, 5, 0.1};
    const Mollified z = mollify_state(zero_state(lat, 0.1), 0.1);
    CHECK(max_abs(z.v) == 0.0);
    CHECK(max_abs(z.commutator) == 0.0);
    CHECK(max_abs(z.defect) == 0.0);

    IterationState s = prescribed_state(lat, 0.1, InitialData{1.0, 0.0, 0.0, 0.0});
    const double v2 = std::pow(norm(s.v, NormSpec::linf()), 2);
    double previous = 1e300;
    for (double ell : {0.2, 0.05, 0.01, 1e-4}) {
        const Mollified m = mollify_state(s, ell);
        CHECK(m.commutator_sup < previous);
        previous = m.commutator_sup;
        MESSAGE("ell = " << ell << ": commutator / (ell |v|_C1 |v|_inf) = " << m.commutator_constant);
    }
    CHECK(previous < 1e-6 * v2);
}

TEST_CASE("step from the zero state below the threshold leaves the state unchanged") {
    const Lattice lat{25, 5, 0.02};
    const DirectionSet dirs = certified_dirs();
    const ParameterSchedule sched = desk_schedule(5, 4.0, 0.05, 1.0, 0.5);
    EnergyProfile e;
    e.base = 0.01 / 100.0;  // below delta_{q+2}/2
    const StepResult r = step(zero_state(lat, 0.01), sched, e, dirs);
    CHECK(max_abs(r.next.v) == 0.0);
    CHECK(max_abs(r.next.R) == 0.0);
    CHECK(r.report["energy"]["zero_case_ok"].get<bool>());
    CHECK(r.report["energy"]["zero_case_samples"].get<int>() == lat.n_time);
}

// lambda = 10 keeps every wave frequency inside the annulus on n = 33
TEST_CASE("step from the zero state above the threshold is exact") {
    const Lattice lat{33, 5, 0.02};
    const DirectionSet dirs = certified_dirs();
    const ParameterSchedule sched = desk_schedule(10, 10.0, 0.05, 1.0, 0.5);
    EnergyProfile e;
    e.base = 0.5;
    StepOptions opt;
    opt.amp_modes = 1;
    const StepResult r = step(zero_state(lat, 0.01), sched, e, dirs, opt);
    CHECK(l2_norm(r.next.v) > 0.0);
    CHECK(r.report["residual"]["relative"].get<double>() < 1e-8);
    CHECK(r.report["stress"]["piece_sum_residual"].get<double>() < 1e-10);
    CHECK_NOTHROW(validate_state(r.next, 1e-9));
}

TEST_CASE("step from a prescribed stress is exact") {
    const Lattice lat{33, 5, 0.02};
    const DirectionSet dirs = certified_dirs();
    // tilde_e must exceed 3 |T^3| sup|R| / eps_gamma for rho_0 to dominate the stress
    const ParameterSchedule sched = desk_schedule(10, 10.0, 0.05, 5000.0, 3000.0);
    const IterationState s = prescribed_state(lat, 0.01, InitialData{0.05, 0.3, 2.0, 0.3});
    CHECK(nsr_residual(s.v, s.p, s.R, s.nu).relative < 1e-12);
    EnergyProfile e;
    const double v2 = std::pow(l2_norm(s.v), 2);
    e.base = v2 + 4000.0;
    StepOptions opt;
    opt.amp_modes = 1;
    const StepResult r = step(s, sched, e, dirs, opt);
    CHECK(r.report["residual"]["relative"].get<double>() < 1e-8);
    CHECK(r.report["amplitudes"]["wwid_node_residual"].get<double>() < 1e-8);
    CHECK(r.report["perturbation"]["peanuts_residual"].get<double>() < 1e-8);
}

TEST_CASE("euler initialization") {
    const Lattice lat{17, 5, 0.1};
    ParameterSchedule sched;
    for (double lam : {4.0, 8.0, 16.0}) {
        DeskLevel d;
        d.lambda_q = lam;
        d.lambda_next = 5;
        d.sigma = 0.2;
        sched.desk.push_back(d);
    }
    const EulerInitResult z = euler_init(FourierField(lat, 3), 0, sched);
    CHECK(max_abs(z.state.v) == 0.0);
    CHECK(max_abs(z.state.R) == 0.0);

    const IterationState abc = prescribed_state(lat, 1.0, InitialData{1.0, 0.0, 0.0, 0.0});
    double previous = 1e300;
    for (int n = 0; n < 3; ++n) {
        const EulerInitResult r = euler_init(abc.v, n, sched);
        CHECK(r.report["residual"]["relative"].get<double>() < 1e-8);
        const double RL1 = r.report["R_L1"].get<double>();
        CHECK(RL1 < previous);
        previous = RL1;
        MESSAGE("lambda_n = " << r.report["lambda_n"].get<double>() << ": ||R_n||_L1 = " << RL1);
    }
    FourierField bad(lat, 3);
    bad.set_mode(0, 0, 1, 0, 0, 1.0);
    CHECK_THROWS_AS(euler_init(bad, 0, sched), std::invalid_argument);
}

TEST_CASE("state validation") {
    const Lattice lat{9, 5, 0.1};
    IterationState s = zero_state(lat, 0.5);
    CHECK_NOTHROW(validate_state(s));
    s.v.set_mode(0, 1, 1, 0, 0, 1.0);
    CHECK_THROWS(validate_state(s));
}
