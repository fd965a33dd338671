#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "nsrlab/fft.hpp"
#include "nsrlab/spectral.hpp"
#include "nsrlab/waves.hpp"

using namespace nsr;

namespace {

const cplx I(0.0, 1.0);

FourierField random_field(const Lattice& lat, int comps, int band, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    FourierField f(lat, comps);
    for (int t = 0; t < lat.n_time; ++t)
        for (int c = 0; c < comps; ++c)
            for (int k1 = -band; k1 <= band; ++k1)
                for (int k2 = -band; k2 <= band; ++k2)
                    for (int k3 = 0; k3 <= band; ++k3) f.set_mode(c, t, k1, k2, k3, cplx(n(rng), n(rng)));
    return f;
}

double max_abs_diff(const FourierField& a, const FourierField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
    return m;
}

double max_abs(const FourierField& a) {
    double m = 0.0;
    for (const cplx& x : a.raw()) m = std::max(m, std::abs(x));
    return m;
}

// sin(k x_axis) as a single pair of modes.
FourierField sine(const Lattice& lat, int axis, int k) {
    FourierField f(lat, 1);
    int m[3] = {0, 0, 0};
    m[axis] = k;
    for (int t = 0; t < lat.n_time; ++t) f.set_mode(0, t, m[0], m[1], m[2], 1.0 / (2.0 * I));
    return f;
}

}  // namespace

TEST_CASE("spatial derivative of a sine is a cosine") {
    Lattice lat{9, 1, 0.0};
    const FourierField f = sine(lat, 0, 1);
    const FourierField d = derivative(f, Axis::x1, 1);
    CHECK(std::abs(d.mode(0, 0, 1, 0, 0) - cplx(0.5, 0.0)) < 1e-15);
    CHECK(std::abs(d.mode(0, 0, -1, 0, 0) - cplx(0.5, 0.0)) < 1e-15);
    FourierField c(lat, 1);
    c.set_mode(0, 0, 0, 0, 0, 3.0);
    CHECK(max_abs(derivative(c, Axis::x2, 1)) == 0.0);
    FourierField g(lat, 1);
    g.set_mode(0, 0, 0, 3, 0, 1.0);
    const FourierField d2 = derivative(g, Axis::x2, 2);
    CHECK(std::abs(d2.mode(0, 0, 0, 3, 0) + 9.0) < 1e-14);
    CHECK(std::abs(d2.mode(0, 0, 0, -3, 0) + 9.0) < 1e-14);
}

TEST_CASE("time stencil differentiates quartic polynomials exactly") {
    Lattice lat{3, 9, 2.0};
    FourierField f(lat, 1);
    auto poly = [](double t) { return 1.0 - 2.0 * t + 0.5 * t * t + 0.3 * t * t * t - 0.1 * t * t * t * t; };
    auto dpoly = [](double t) { return -2.0 + t + 0.9 * t * t - 0.4 * t * t * t; };
    for (int j = 0; j < lat.n_time; ++j) f.set_mode(0, j, 0, 0, 0, poly(lat.time(j)));
    const FourierField d = time_derivative(f);
    for (int j = 0; j < lat.n_time; ++j) CHECK(std::abs(d.mode(0, j, 0, 0, 0).real() - dpoly(lat.time(j))) < 1e-12);
    CHECK_THROWS(derivative(f, Axis::t, 5));
    Lattice short_lat{3, 4, 1.0};
    CHECK_THROWS(time_derivative(FourierField(short_lat, 1)));
}

TEST_CASE("leray projection is idempotent and kills gradients") {
    Lattice lat{11, 1, 0.0};
    FourierField g = random_field(lat, 1, 5, 1);
    g.set_mode(0, 0, 0, 0, 0, 0.0);
    CHECK(max_abs(leray_project(gradient(g))) < 1e-13);
    const FourierField v = random_field(lat, 3, 5, 2);
    const FourierField p1 = leray_project(v);
    CHECK(max_abs_diff(leray_project(p1), p1) < 1e-13);
    CHECK(max_abs(divergence(p1)) < 1e-12);
}

TEST_CASE("frequency bands partition a field") {
    Lattice lat{11, 1, 0.0};
    const FourierField f = random_field(lat, 3, 5, 3);
    const FourierField lo = freq_project(f, Band::at_most(3.0));
    FourierField hi = f - lo;
    for_each_mode(lat, [&](std::size_t idx, int k1, int k2, int k3) {
        const long ks = k1 * k1 + k2 * k2 + k3 * k3;
        if (ks <= 9) CHECK(std::abs(hi.slab(0, 0)[idx]) == 0.0);
        else CHECK(std::abs(lo.slab(0, 0)[idx]) == 0.0);
    });
    const FourierField nz = freq_project(f, Band::nonzero());
    CHECK(std::abs(nz.mode(0, 0, 0, 0, 0)) == 0.0);
    CHECK_THROWS(freq_project(f, Band::between(3.0, 2.0)));
    FourierField c(lat, 1);
    c.set_mode(0, 0, 0, 0, 0, 2.0);
    CHECK(max_abs(freq_project(c, Band::at_least(1.0))) == 0.0);
}

TEST_CASE("inverse divergence inverts div on mean-free parts") {
    Lattice lat{9, 1, 0.0};
    const FourierField v = random_field(lat, 3, 4, 4);
    const FourierField R = inverse_divergence(v);
    const FourierField back = divergence(R);
    const FourierField target = freq_project(v, Band::nonzero());
    CHECK(max_abs_diff(back, target) < 1e-12);
    CHECK(max_abs(trace_of(R)) < 1e-13);
    CHECK(max_abs(inverse_divergence(FourierField(lat, 3))) == 0.0);
}

TEST_CASE("inverse divergence matches the minimal-norm trace-free solve on divergence-free data") {
    // Dense oracle: per mode, solve i X k = v over trace-free symmetric X by a
    // minimal-norm least-squares solve in the Frobenius inner product.
    Lattice lat{7, 1, 0.0};
    const FourierField v = leray_project(random_field(lat, 3, 3, 5));
    const FourierField R = inverse_divergence(v);
    // basis of trace-free symmetric matrices, orthonormal in Frobenius
    std::vector<Eigen::Matrix3d> basis;
    const double h = 1.0 / std::sqrt(2.0);
    auto E = [](int i, int j) { Eigen::Matrix3d m = Eigen::Matrix3d::Zero(); m(i, j) = 1; return m; };
    basis.push_back(h * (E(0, 1) + E(1, 0)));
    basis.push_back(h * (E(0, 2) + E(2, 0)));
    basis.push_back(h * (E(1, 2) + E(2, 1)));
    basis.push_back(h * (E(0, 0) - E(1, 1)));
    basis.push_back((E(0, 0) + E(1, 1) - 2.0 * E(2, 2)) / std::sqrt(6.0));
    double worst = 0.0;
    for_each_mode(lat, [&](std::size_t idx, int k1, int k2, int k3) {
        if (k1 == 0 && k2 == 0 && k3 == 0) return;
        const Eigen::Vector3d k(k1, k2, k3);
        Eigen::MatrixXcd A(3, 5);
        for (int b = 0; b < 5; ++b) A.col(b) = I * (basis[b] * k).cast<cplx>();
        Eigen::Vector3cd rhs(v.slab(0, 0)[idx], v.slab(1, 0)[idx], v.slab(2, 0)[idx]);
        const Eigen::VectorXcd coef = A.completeOrthogonalDecomposition().solve(rhs);
        Eigen::Matrix3cd X = Eigen::Matrix3cd::Zero();
        for (int b = 0; b < 5; ++b) X += coef(b) * basis[b].cast<cplx>();
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) worst = std::max(worst, std::abs(X(i, j) - R.slab(sym_index(i, j), 0)[idx]));
    });
    CHECK(worst < 1e-12);
}

TEST_CASE("inverse divergence of a Beltrami pair scales like 1/lambda") {
    const DirectionSet dirs = build_direction_set(1);
    Lattice lat{23, 1, 0.0};
    const FourierField W = beltrami_pair(lat, dirs.families[0].dirs[0], 10);
    const FourierField R = inverse_divergence(W);
    CHECK(max_abs_diff(divergence(R), W) < 1e-13);
    // for divergence-free v the symbol is -i(k v^T + v k^T)/|k|^2, whose Frobenius
    // norm is sqrt(2)|v|/|k|
    CHECK(std::abs(l2_norm(R) - std::sqrt(2.0) * l2_norm(W) / 10.0) < 1e-10 * l2_norm(W));
}

TEST_CASE("bump transform agrees with adaptive quadrature") {
    using boost::math::quadrature::gauss_kronrod;
    auto mass = gauss_kronrod<double, 61>::integrate([](double s) { return bump(s) * s * s; }, 0.0, 2.0, 15, 1e-14);
    for (double xi : {0.0, 0.7, 2.5, 6.0, 11.0}) {
        const double num = gauss_kronrod<double, 61>::integrate(
            [xi](double s) { return bump(s) * s * s * (xi == 0.0 ? 1.0 : std::sin(xi * s) / (xi * s + 1e-300)); }, 0.0,
            2.0, 15, 1e-14);
        CHECK(std::abs(bump_hat_3d(xi) - num / mass) < 1e-9);
    }
    auto m1 = gauss_kronrod<double, 61>::integrate([](double s) { return bump(s); }, -2.0, 2.0, 15, 1e-14);
    CHECK(std::abs(bump_mass_1d() - m1) < 1e-10);
    CHECK(std::abs(bump_hat_1d(0.0) - 1.0) < 1e-12);
}

TEST_CASE("mollifier keeps constants and damps single modes monotonically") {
    Lattice lat{9, 6, 1.0};
    FourierField c(lat, 1);
    for (int t = 0; t < lat.n_time; ++t) c.set_mode(0, t, 0, 0, 0, 2.5);
    CHECK(max_abs_diff(mollify(c, 0.3, MollifyDomain::both), c) < 1e-14);
    const FourierField f = sine(lat, 1, 3);
    double prev = 1.0;
    // first zero of the radial transform lies past ell|k| = 2
    for (double ell : {0.05, 0.1, 0.2, 0.4, 0.6}) {
        const FourierField m = mollify(f, ell, MollifyDomain::space);
        const double amp = std::abs(m.mode(0, 0, 0, 3, 0)) / std::abs(f.mode(0, 0, 0, 3, 0));
        CHECK(amp <= 1.0);
        CHECK(amp < prev);
        CHECK(std::abs(amp - std::abs(bump_hat_3d(3.0 * ell))) < 1e-14);
        prev = amp;
    }
    CHECK_THROWS(mollify(f, 4.0, MollifyDomain::space));
    CHECK_THROWS(mollify(f, 0.0, MollifyDomain::space));
}

TEST_CASE("mollification error is controlled by ell times the C1 norm") {
    Lattice lat{17, 1, 0.0};
    FourierField f = random_field(lat, 1, 3, 11);
    f.set_mode(0, 0, 0, 0, 0, 0.0);
    const double c1 = norm(f, NormSpec::cn(1));
    double worst = 0.0;
    for (double ell : {0.02, 0.05, 0.1}) {
        const double err = norm(f - mollify(f, ell, MollifyDomain::space), NormSpec::linf());
        worst = std::max(worst, err / (ell * c1));
    }
    MESSAGE("measured mollification constant " << worst);
    CHECK(worst < 2.0);
}

TEST_CASE("norms of a sine") {
    Lattice lat{9, 1, 0.0};
    const FourierField f = sine(lat, 0, 1);
    const double l2 = std::pow(2.0 * kPi, 1.5) / std::sqrt(2.0);
    CHECK(std::abs(norm(f, NormSpec::lp(2.0)) - l2) < 1e-10 * l2);
    CHECK(std::abs(l2_norm(f) - l2) < 1e-12 * l2);
    // a grid containing x = pi/2 attains the sup exactly
    const NormOptions fine{4};
    CHECK(std::abs(norm(f, NormSpec::cn(1), fine) - 2.0) < 1e-12);
    CHECK(std::abs(norm(f, NormSpec::linf(), fine) - 1.0) < 1e-12);
    // the default grid is a lower bound within its resolution
    const double h = 2.0 * kPi / fft_size_at_least(2 * lat.n_space);
    const double c1 = norm(f, NormSpec::cn(1));
    CHECK(c1 <= 2.0 + 1e-14);
    CHECK(c1 >= 2.0 * std::cos(h / 2.0) - 1e-14);
    CHECK(std::abs(norm(f, NormSpec::hs(0.0)) - l2) < 1e-12 * l2);
    CHECK_THROWS(norm(f, NormSpec::lp(1.0)));
}

TEST_CASE("Parseval holds for random tensors") {
    Lattice lat{9, 2, 1.0};
    const FourierField R = random_field(lat, 6, 4, 7);
    const double grid = norm(R, NormSpec::lp(2.0));
    CHECK(std::abs(grid - l2_norm(R)) < 1e-12 * grid);
}

TEST_CASE("dealiased product of cosines") {
    Lattice lat{9, 1, 0.0};
    FourierField f(lat, 1);
    f.set_mode(0, 0, 1, 0, 0, 1.0);
    const ProductResult p = dealiased_product(f, f, Contraction::scalar);
    CHECK(std::abs(p.field.mode(0, 0, 0, 0, 0) - 2.0) < 1e-14);
    CHECK(std::abs(p.field.mode(0, 0, 2, 0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(p.field.mode(0, 0, -2, 0, 0) - 1.0) < 1e-14);
    CHECK(p.truncation_loss < 1e-20);
    FourierField one(lat, 1);
    one.set_mode(0, 0, 0, 0, 0, 1.0);
    const FourierField v = random_field(lat, 3, 4, 8);
    CHECK(max_abs_diff(dealiased_product(one, v, Contraction::scalar).field, v) < 1e-13);
}

TEST_CASE("band-limited products are coefficient-exact against direct convolution") {
    Lattice lat{13, 1, 0.0};
    const int band = 4;  // <= n/3
    const FourierField f = random_field(lat, 3, band / 2, 9);
    const FourierField g = random_field(lat, 3, band / 2, 10);
    const ProductResult p = dealiased_product(f, g, Contraction::dot);
    CHECK(p.truncation_loss < 1e-20);
    const int B = band / 2;
    double worst = 0.0;
    for (int k1 = -2 * B; k1 <= 2 * B; ++k1)
        for (int k2 = -2 * B; k2 <= 2 * B; ++k2)
            for (int k3 = -2 * B; k3 <= 2 * B; ++k3) {
                cplx acc = 0.0;
                for (int a1 = -B; a1 <= B; ++a1)
                    for (int a2 = -B; a2 <= B; ++a2)
                        for (int a3 = -B; a3 <= B; ++a3)
                            for (int c = 0; c < 3; ++c)
                                acc += f.mode(c, 0, a1, a2, a3) * g.mode(c, 0, k1 - a1, k2 - a2, k3 - a3);
                worst = std::max(worst, std::abs(acc - p.field.mode(0, 0, k1, k2, k3)));
            }
    CHECK(worst < 1e-11);
}

TEST_CASE("truncation loss reports discarded energy") {
    Lattice lat{5, 1, 0.0};
    FourierField f(lat, 1);
    f.set_mode(0, 0, 2, 0, 0, 1.0);
    const ProductResult p = dealiased_product(f, f, Contraction::scalar);
    // f^2 = 2 + e^{4ix} + e^{-4ix}; the pair at |k| = 4 leaves the lattice
    CHECK(std::abs(p.truncation_loss - 2.0 * kTorusVolume) < 1e-10);
}

TEST_CASE("residual vanishes for zero data and a stationary Beltrami flow") {
    Lattice lat{25, 5, 1.0};
    const ResidualResult z = nsr_residual(FourierField(lat, 3), FourierField(lat, 1), FourierField(lat, 6), 0.0);
    CHECK(z.relative == 0.0);
    const DirectionSet dirs = build_direction_set(1);
    const auto& fam = dirs.families[0];
    FourierField v = beltrami_pair(lat, fam.dirs[0], 10) + beltrami_pair(lat, fam.dirs[2], 10);
    FourierField p = dealiased_product(v, v, Contraction::dot).field;
    p *= -0.5;
    const ResidualResult r = nsr_residual(v, p, FourierField(lat, 6), 0.0);
    CHECK(r.scale > 1.0);
    CHECK(r.relative < 1e-12);
}
