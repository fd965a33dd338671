#include "nsrlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/integer/common_factor.hpp>

namespace nsr {

RVec3 cross(const RVec3& a, const RVec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Rational dot(const RVec3& a, const RVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 to_double(const RVec3& v) {
    return {boost::rational_cast<double>(v[0]), boost::rational_cast<double>(v[1]),
            boost::rational_cast<double>(v[2])};
}

CVec3 Direction::B() const {
    const Vec3 a = to_double(A), e = to_double(xi_x_A);
    const double s = 1.0 / std::sqrt(2.0);
    return {std::complex<double>(a[0], e[0]) * s, std::complex<double>(a[1], e[1]) * s,
            std::complex<double>(a[2], e[2]) * s};
}

double DirectionSet::c_Lambda() const { return std::sqrt(boost::rational_cast<double>(c_sq)); }

double frobenius(const Sym3& m) {
    double s = 0.0;
    for (int c = 0; c < 6; ++c) s += (c == 0 || c == 3 || c == 5 ? 1.0 : 2.0) * m[c] * m[c];
    return std::sqrt(s);
}

Sym3 identity_sym() { return {1, 0, 0, 1, 0, 1}; }

namespace {

using Mat6 = std::array<std::array<Rational, 6>, 6>;

RVec3 scaled(const RVec3& v, long long s) { return {v[0] * s, v[1] * s, v[2] * s}; }
RVec3 neg(const RVec3& v) { return {-v[0], -v[1], -v[2]}; }

// A Pythagorean direction (alpha e_p + beta e_q)/5 in the plane of two cyclically
// ordered axes p, q = p+1; the frame normal xi x A is e_{q+1}.
Direction planar(int p, int alpha, int beta) {
    const int q = (p + 1) % 3;
    Direction d;
    d.xi = {Rational(0), Rational(0), Rational(0)};
    d.A = d.xi;
    d.xi[p] = Rational(alpha, 5);
    d.xi[q] = Rational(beta, 5);
    d.A[p] = Rational(-beta, 5);
    d.A[q] = Rational(alpha, 5);
    d.xi_x_A = cross(d.xi, d.A);
    return d;
}

// 6-vector of Id - xi xi^T.
std::array<Rational, 6> projector(const RVec3& xi) {
    static const int ii[6] = {0, 0, 0, 1, 1, 2}, jj[6] = {0, 1, 2, 1, 2, 2};
    std::array<Rational, 6> out;
    for (int c = 0; c < 6; ++c) out[c] = Rational(ii[c] == jj[c] ? 1 : 0) - xi[ii[c]] * xi[jj[c]];
    return out;
}

Mat6 invert(Mat6 m) {
    Mat6 inv{};
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) inv[i][j] = Rational(i == j ? 1 : 0);
    for (int col = 0; col < 6; ++col) {
        int piv = -1;
        for (int r = col; r < 6; ++r)
            if (m[r][col] != Rational(0)) {
                piv = r;
                break;
            }
        if (piv < 0) throw std::runtime_error("direction family: projectors are linearly dependent");
        std::swap(m[col], m[piv]);
        std::swap(inv[col], inv[piv]);
        const Rational p = m[col][col];
        for (int j = 0; j < 6; ++j) {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for (int r = 0; r < 6; ++r) {
            if (r == col || m[r][col] == Rational(0)) continue;
            const Rational f = m[r][col];
            for (int j = 0; j < 6; ++j) {
                m[r][j] -= f * m[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

void check_frame(const Direction& d) {
    const Rational one(1), zero(0);
    if (dot(d.xi, d.xi) != one || dot(d.A, d.A) != one || dot(d.xi, d.A) != zero ||
        dot(d.xi_x_A, d.xi_x_A) != one)
        throw std::runtime_error("direction family: frame is not orthonormal");
}

bool is_integer(const RVec3& v) {
    return v[0].denominator() == 1 && v[1].denominator() == 1 && v[2].denominator() == 1;
}

Rational min_half_sum_sq(const std::vector<const Direction*>& all) {
    bool found = false;
    Rational best(0);
    for (const Direction* a : all)
        for (const Direction* b : all) {
            const RVec3 s = {a->xi[0] + b->xi[0], a->xi[1] + b->xi[1], a->xi[2] + b->xi[2]};
            const Rational n = dot(s, s);
            if (n == Rational(0)) continue;
            const Rational c = n / 4;
            if (!found || c < best) best = c, found = true;
        }
    return best;
}

}  // namespace

DirectionSet build_direction_set(int n_families) {
    if (n_families != 1 && n_families != 2) throw std::invalid_argument("n_families must be 1 or 2");
    // family 0 uses (3,4) in each cyclic plane, family 1 uses (4,3)
    static const int coeff[2][2] = {{3, 4}, {4, 3}};
    DirectionSet set;
    for (int f = 0; f < n_families; ++f) {
        Family fam;
        const int a = coeff[f][0], b = coeff[f][1];
        for (int p = 0; p < 3; ++p)
            for (int s : {1, -1}) fam.dirs.push_back(planar(p, a, s * b));
        for (int i = 0; i < 6; ++i) {
            Direction d = fam.dirs[i];
            d.xi = neg(d.xi);
            d.xi_x_A = cross(d.xi, d.A);
            fam.dirs.push_back(d);
        }
        for (int i = 0; i < 12; ++i) {
            fam.dirs[i].family = f;
            fam.dirs[i].index = i;
            fam.dirs[i].positive = i < 6;
            check_frame(fam.dirs[i]);
        }
        Mat6 m{};
        for (int j = 0; j < 6; ++j) {
            const auto pj = projector(fam.dirs[j].xi);
            for (int c = 0; c < 6; ++c) m[c][j] = pj[c];
        }
        fam.inverse = invert(m);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) fam.inverse_d[i][j] = boost::rational_cast<double>(fam.inverse[i][j]);
        std::vector<const Direction*> ptrs;
        for (const auto& d : fam.dirs) ptrs.push_back(&d);
        fam.c_sq = min_half_sum_sq(ptrs);
        set.families.push_back(std::move(fam));
    }
    for (int f = 0; f < n_families; ++f)
        for (int g = 0; g < f; ++g)
            for (const auto& d : set.families[f].dirs)
                for (const auto& e : set.families[g].dirs)
                    if (d.xi == e.xi) throw std::runtime_error("direction families overlap");

    // least N with N xi, N A, N (xi x A) integral for every direction
    long long N = 1;
    for (const auto& fam : set.families)
        for (const auto& d : fam.dirs)
            for (const RVec3* v : {&d.xi, &d.A, &d.xi_x_A})
                for (const Rational& x : *v) N = boost::integer::lcm(N, x.denominator());
    for (const auto& fam : set.families)
        for (const auto& d : fam.dirs)
            if (!is_integer(scaled(d.xi, N)) || !is_integer(scaled(d.A, N)) || !is_integer(scaled(d.xi_x_A, N)))
                throw std::logic_error("N_Lambda computation failed");
    set.N_Lambda = N;

    set.c_sq = set.families[0].c_sq;
    for (const auto& fam : set.families) set.c_sq = std::min(set.c_sq, fam.c_sq);
    std::vector<const Direction*> all;
    for (const auto& fam : set.families)
        for (const auto& d : fam.dirs) all.push_back(&d);
    set.c_union_sq = min_half_sum_sq(all);

    const auto eps = estimate_epsilon_gamma(set);
    set.eps_gamma = eps.eps;
    set.eps_samples = eps.samples_per_radius;
    set.eps_witness = eps.witness;
    set.eps_fail_radius = eps.fail_radius;
    return set;
}

std::array<double, 12> gamma_squared(const Sym3& R, const Family& fam) {
    std::array<double, 12> out{};
    for (int j = 0; j < 6; ++j) {
        double c = 0.0;
        for (int k = 0; k < 6; ++k) c += fam.inverse_d[j][k] * R[k];
        out[j] = out[j + 6] = c;
    }
    return out;
}

std::array<double, 12> gamma(const Sym3& R, const Family& fam) {
    auto c = gamma_squared(R, fam);
    for (double& x : c) {
        if (!(x > 0.0)) throw std::domain_error("gamma: matrix outside the admissible ball");
        x = std::sqrt(x);
    }
    return c;
}

EpsilonGammaResult estimate_epsilon_gamma(const DirectionSet& dirs, std::uint64_t seed, long samples) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    auto random_direction = [&] {
        Sym3 e;
        for (double& x : e) x = normal(rng);
        const double n = frobenius(e);
        for (double& x : e) x /= n;
        return e;
    };
    // returns true when every sample at radius rho keeps all coefficients positive
    Sym3 witness{};
    auto passes = [&](double rho) {
        for (long s = 0; s < samples; ++s) {
            const Sym3 e = random_direction();
            Sym3 R = identity_sym();
            for (int c = 0; c < 6; ++c) R[c] += rho * e[c];
            for (const auto& fam : dirs.families) {
                const auto c = gamma_squared(R, fam);
                if (*std::min_element(c.begin(), c.end()) <= 0.0) {
                    witness = e;
                    return false;
                }
            }
        }
        return true;
    };
    double lo = 0.0, hi = 1.0;
    while (passes(hi)) hi *= 2.0;
    Sym3 fail_witness = witness;
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (passes(mid)) {
            lo = mid;
        } else {
            hi = mid;
            fail_witness = witness;
        }
    }
    EpsilonGammaResult r;
    r.pass_radius = lo;
    r.fail_radius = hi;
    r.eps = 0.5 * lo;
    r.witness = fail_witness;
    r.samples_per_radius = samples;
    return r;
}

std::string serialize_directions(const DirectionSet& dirs) {
    std::ostringstream os;
    os << "# family index xi(num/den x3) A(num/den x3)\n";
    for (const auto& fam : dirs.families)
        for (const auto& d : fam.dirs) {
            os << d.family << ' ' << d.index;
            for (const RVec3* v : {&d.xi, &d.A})
                for (const Rational& x : *v) os << ' ' << x.numerator() << '/' << x.denominator();
            os << '\n';
        }
    os << "N_Lambda " << dirs.N_Lambda << '\n';
    os << "c_Lambda_sq " << dirs.c_sq.numerator() << '/' << dirs.c_sq.denominator() << '\n';
    return os.str();
}

}  // namespace nsr
