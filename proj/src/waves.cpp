#include "nsrlab/waves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsrlab/spectral.hpp"

namespace nsr {

namespace {

const cplx I(0.0, 1.0);

using IVec3 = std::array<long long, 3>;

IVec3 integral(const RVec3& v, long long N) {
    IVec3 out;
    for (int i = 0; i < 3; ++i) {
        const Rational x = v[i] * N;
        if (x.denominator() != 1) throw std::invalid_argument("wave: N_Lambda does not clear denominators");
        out[i] = x.numerator();
    }
    return out;
}

// Visit the modes of eta: fn(j1, k) with k the integer wave vector.
// eta of -xi is eta of xi, so negative directions use the frame of their positive partner.
template <class Fn>
void eta_modes(const Direction& d, const WaveParams& p, long long N, Fn&& fn) {
    const RVec3 xi = d.positive ? d.xi : RVec3{-d.xi[0], -d.xi[1], -d.xi[2]};
    const IVec3 e1 = integral(xi, N), e2 = integral(d.A, N), e3 = integral(cross(xi, d.A), N);
    const long long s = p.lambda_sigma;
    for (int j1 = -p.r; j1 <= p.r; ++j1)
        for (int j2 = -p.r; j2 <= p.r; ++j2)
            for (int j3 = -p.r; j3 <= p.r; ++j3) {
                Key3 k;
                for (int i = 0; i < 3; ++i) k[i] = static_cast<int>(s * (j1 * e1[i] + j2 * e2[i] + j3 * e3[i]));
                fn(j1, k);
            }
}

double kernel_coefficient(int r) { return std::pow(2.0 * r + 1.0, -1.5); }

double temporal_rate(const WaveParams& p, long long N) {
    return static_cast<double>(p.lambda_sigma) * static_cast<double>(N) * p.mu;
}

Key3 lambda_xi(const Direction& d, int lambda) {
    Key3 k;
    for (int i = 0; i < 3; ++i) {
        const Rational x = d.xi[i] * lambda;
        if (x.denominator() != 1) throw std::invalid_argument("beltrami: lambda xi is not integral");
        k[i] = static_cast<int>(x.numerator());
    }
    return k;
}

void require_fits(const Lattice& lat, int bw, const char* what) {
    if (bw > lat.K()) throw std::invalid_argument(std::string(what) + ": lattice too small for the wave");
}

Lattice static_lattice(const Lattice& lat) { return Lattice{lat.n_space, 1, 0.0}; }

// Mean over the torus of f_a g_b at time t (Parseval on the half spectrum).
double mean_product(const FourierField& f, int a, const FourierField& g, int b, int t) {
    const cplx* x = f.slab(a, t);
    const cplx* y = g.slab(b, t);
    double acc = 0.0;
    for_each_mode(f.lattice(), [&](std::size_t idx, int, int, int k3) {
        acc += half_weight(k3) * (x[idx] * std::conj(y[idx])).real();
    });
    return acc;
}

FourierField times_vector(const FourierField& s, const Vec3& v) {
    FourierField out(s.lattice(), 3);
    for (int c = 0; c < 3; ++c) {
        FourierField comp = s;
        comp *= v[c];
        out.set_component(c, comp);
    }
    return out;
}

double relative(const FourierField& diff, const FourierField& ref) {
    const double n = l2_norm(ref);
    return n > 0.0 ? l2_norm(diff) / n : l2_norm(diff);
}

}  // namespace

WaveCheck check_wave_params(const WaveParams& p, const DirectionSet& dirs) {
    if (p.lambda <= 0 || p.lambda % dirs.N_Lambda != 0)
        throw std::invalid_argument("wave params: lambda must be a positive multiple of N_Lambda");
    if (p.lambda_sigma < 1) throw std::invalid_argument("wave params: lambda*sigma must be a positive integer");
    if (p.r < 1) throw std::invalid_argument("wave params: r must be >= 1");
    if (!(p.mu > 0.0)) throw std::invalid_argument("wave params: mu must be positive");
    WaveCheck c;
    c.sigma_r = p.sigma() * p.r;
    c.sigma_r_bound = dirs.c_Lambda() / (10.0 * static_cast<double>(dirs.N_Lambda));
    c.sigma_r_ok = c.sigma_r <= c.sigma_r_bound;
    double rad = 0.0;
    for (const auto& fam : dirs.families)
        for (const auto& d : fam.dirs) rad = std::max(rad, eta_radius(d, p, dirs.N_Lambda));
    c.annulus_ok = rad <= 0.5 * p.lambda;
    return c;
}

int eta_bandwidth(const Direction& d, const WaveParams& p, long long N) {
    int bw = 0;
    eta_modes(d, p, N, [&](int, const Key3& k) {
        for (int x : k) bw = std::max(bw, std::abs(x));
    });
    return bw;
}

double eta_radius(const Direction& d, const WaveParams& p, long long N) {
    double rad = 0.0;
    eta_modes(d, p, N, [&](int, const Key3& k) {
        rad = std::max(rad, std::sqrt(double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2]));
    });
    return rad;
}

int wave_bandwidth(const Direction& d, const WaveParams& p, long long N) {
    const Key3 c = lambda_xi(d, p.lambda);
    int bw = 0;
    eta_modes(d, p, N, [&](int, const Key3& k) {
        for (int i = 0; i < 3; ++i) bw = std::max(bw, std::abs(k[i] + c[i]));
    });
    return bw;
}

FourierField dirichlet_kernel(const Lattice& lat, int r) {
    if (r < 1) throw std::invalid_argument("dirichlet_kernel: r must be >= 1");
    require_fits(lat, r, "dirichlet_kernel");
    FourierField f(lat, 1);
    const double c = kernel_coefficient(r);
    for (int t = 0; t < lat.n_time; ++t)
        for (int k1 = -r; k1 <= r; ++k1)
            for (int k2 = -r; k2 <= r; ++k2)
                for (int k3 = 0; k3 <= r; ++k3) f.set_mode(0, t, k1, k2, k3, c);
    return f;
}

FourierField eta(const Lattice& lat, const Direction& d, const WaveParams& p, long long N) {
    require_fits(lat, eta_bandwidth(d, p, N), "eta");
    FourierField f(lat, 1);
    const double c = kernel_coefficient(p.r), w = temporal_rate(p, N);
    eta_modes(d, p, N, [&](int j1, const Key3& k) {
        if (k[2] < 0) return;
        for (int t = 0; t < lat.n_time; ++t)
            f.set_mode(0, t, k[0], k[1], k[2], c * std::exp(I * (j1 * w * lat.time(t))));
    });
    return f;
}

FourierField eta_time_derivative(const Lattice& lat, const Direction& d, const WaveParams& p, long long N) {
    require_fits(lat, eta_bandwidth(d, p, N), "eta");
    FourierField f(lat, 1);
    const double c = kernel_coefficient(p.r), w = temporal_rate(p, N);
    eta_modes(d, p, N, [&](int j1, const Key3& k) {
        if (k[2] < 0) return;
        for (int t = 0; t < lat.n_time; ++t)
            f.set_mode(0, t, k[0], k[1], k[2], I * (j1 * w) * c * std::exp(I * (j1 * w * lat.time(t))));
    });
    f.mean_free = true;
    return f;
}

FourierField beltrami_pair(const Lattice& lat, const Direction& d, int lambda) {
    const Key3 k = lambda_xi(d, lambda);
    require_fits(lat, std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])}), "beltrami_pair");
    FourierField f(lat, 3);
    const CVec3 B = d.B();
    for (int t = 0; t < lat.n_time; ++t)
        for (int c = 0; c < 3; ++c) f.set_mode(c, t, k[0], k[1], k[2], B[c]);
    f.mean_free = true;
    return f;
}

FourierField intermittent_pair(const Lattice& lat, const Direction& d, const WaveParams& p, long long N) {
    require_fits(lat, wave_bandwidth(d, p, N), "intermittent_pair");
    // direct convolution of the eta modes with the two modes of the Beltrami pair
    FourierField out(lat, 3);
    const Key3 c = lambda_xi(d, p.lambda);
    const CVec3 B = d.B();
    const double amp = kernel_coefficient(p.r), w = temporal_rate(p, N);
    bool hits_zero = false;
    eta_modes(d, p, N, [&](int j1, const Key3& k) {
        const Key3 s = {k[0] + c[0], k[1] + c[1], k[2] + c[2]};
        // at s = 0 the term and its partner coincide: 2 Re(e B)
        const bool zero = s[0] == 0 && s[1] == 0 && s[2] == 0;
        hits_zero = hits_zero || zero;
        for (int t = 0; t < lat.n_time; ++t) {
            const cplx e = amp * std::exp(I * (j1 * w * lat.time(t)));
            // the conjugate partner at -s receives conj(e) conj(B) automatically
            for (int i = 0; i < 3; ++i) out.add_mode(i, t, s[0], s[1], s[2], (zero ? 2.0 : 1.0) * e * B[i]);
        }
    });
    out.mean_free = !hits_zero;
    return out;
}

// ---------------------------------------------------------------- sparse

SparseScalar eta_sparse(const Direction& d, const WaveParams& p, long long N, double t) {
    SparseScalar out;
    const double c = kernel_coefficient(p.r), w = temporal_rate(p, N);
    eta_modes(d, p, N, [&](int j1, const Key3& k) { out[k] += c * std::exp(I * (j1 * w * t)); });
    return out;
}

SparseVector beltrami_sparse(const Direction& d, int lambda) {
    SparseVector out;
    out[lambda_xi(d, lambda)] = d.B();
    return out;
}

SparseVector intermittent_sparse(const Direction& d, const WaveParams& p, long long N, double t) {
    const SparseScalar e = eta_sparse(d, p, N, t);
    const Key3 c = lambda_xi(d, p.lambda);
    const CVec3 B = d.B();
    SparseVector out;
    for (const auto& [k, v] : e) {
        const Key3 s = {k[0] + c[0], k[1] + c[1], k[2] + c[2]};
        CVec3& o = out[s];
        for (int i = 0; i < 3; ++i) o[i] += v * B[i];
    }
    return out;
}

SparseTensor outer_sparse(const SparseVector& f, const SparseVector& g) {
    SparseTensor out;
    for (const auto& [k, a] : f)
        for (const auto& [l, b] : g) {
            auto& o = out[{k[0] + l[0], k[1] + l[1], k[2] + l[2]}];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) o[3 * i + j] += a[i] * b[j];
        }
    return out;
}

SparseScalar dot_sparse(const SparseVector& f, const SparseVector& g) {
    SparseScalar out;
    for (const auto& [k, a] : f)
        for (const auto& [l, b] : g) out[{k[0] + l[0], k[1] + l[1], k[2] + l[2]}] += a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    return out;
}

namespace {
double magnitude(const cplx& v) { return std::abs(v); }
template <std::size_t M>
double magnitude(const std::array<cplx, M>& v) {
    double s = 0.0;
    for (const cplx& x : v) s += std::norm(x);
    return std::sqrt(s);
}
}  // namespace

template <class Map>
std::array<double, 2> support_radii(const Map& m, double tol) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& [k, v] : m) {
        if (magnitude(v) <= tol) continue;
        const double r = std::sqrt(double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2]);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return {lo, hi};
}
template std::array<double, 2> support_radii(const SparseScalar&, double);
template std::array<double, 2> support_radii(const SparseVector&, double);
template std::array<double, 2> support_radii(const SparseTensor&, double);

// ---------------------------------------------------------------- checks

double beltrami_eigen_residual(const Family& fam, int lambda) {
    double worst = 0.0;
    for (const auto& d : fam.dirs) {
        const Vec3 xi = d.xi_d();
        const CVec3 B = d.B();
        // curl of B e^{i lambda xi.x} is i lambda xi x B times the same exponential
        const CVec3 curl = {I * double(lambda) * (xi[1] * B[2] - xi[2] * B[1]),
                            I * double(lambda) * (xi[2] * B[0] - xi[0] * B[2]),
                            I * double(lambda) * (xi[0] * B[1] - xi[1] * B[0])};
        double e = 0.0;
        for (int i = 0; i < 3; ++i) e += std::norm(curl[i] - double(lambda) * B[i]);
        worst = std::max(worst, std::sqrt(e) / lambda);
        worst = std::max(worst, std::abs(xi[0] * B[0] + xi[1] * B[1] + xi[2] * B[2]));
    }
    return worst;
}

double mean_tensor_check(const Lattice& lat, const Family& fam, const WaveParams& p, long long N, const Sym3& R) {
    const auto g2 = gamma_squared(R, fam);
    double worst = 0.0;
    std::vector<FourierField> pairs;
    for (int j = 0; j < 6; ++j) pairs.push_back(intermittent_pair(lat, fam.dirs[j], p, N));
    for (int t = 0; t < lat.n_time; ++t) {
        Sym3 acc{};
        for (int j = 0; j < 6; ++j)
            for (int i = 0; i < 3; ++i)
                for (int k = i; k < 3; ++k)
                    // the real pair carries both W_xi (x) W_{-xi} and W_{-xi} (x) W_xi
                    acc[sym_index(i, k)] += g2[j] * mean_product(pairs[j], i, pairs[j], k, t);
        Sym3 diff;
        for (int c = 0; c < 6; ++c) diff[c] = acc[c] - R[c];
        worst = std::max(worst, frobenius(diff));
    }
    return worst;
}

double oscillation_identity_check(const Lattice& lat, const Direction& d, const WaveParams& p, long long N) {
    const double rad = eta_radius(d, p, N);
    if (!(2.0 * rad < p.lambda && 2.0 * p.lambda - 2.0 * rad > p.lambda))
        throw std::invalid_argument("oscillation check: low and high parts overlap");
    const FourierField P = intermittent_pair(lat, d, p, N);
    const FourierField PP = dealiased_product(P, P, Contraction::outer).field;
    const FourierField lhs = divergence(freq_project(PP, Band::at_most(p.lambda)));
    const FourierField e = eta(lat, d, p, N);
    const FourierField edt = eta_time_derivative(lat, d, p, N);
    const FourierField e2 = dealiased_product(e, e, Contraction::scalar).field;
    FourierField e2dt = dealiased_product(e, edt, Contraction::scalar).field;
    e2dt *= 2.0 / p.mu;
    const FourierField rhs = gradient(e2) - times_vector(e2dt, d.xi_d());
    return relative(lhs - rhs, rhs);
}

double pair_identity_check(const Lattice& lat, const Direction& d, const Direction& e, const WaveParams& p,
                           long long N) {
    const FourierField P = intermittent_pair(lat, d, p, N);
    const FourierField Q = intermittent_pair(lat, e, p, N);
    FourierField sym = dealiased_product(P, Q, Contraction::outer).field;
    sym *= 2.0;
    const FourierField lhs = divergence(sym);
    const Lattice st = static_lattice(lat);
    const FourierField U = beltrami_pair(st, d, p.lambda);
    const FourierField V = beltrami_pair(st, e, p.lambda);
    const FourierField s = dealiased_product(eta(lat, d, p, N), eta(lat, e, p, N), Contraction::scalar).field;
    const FourierField gs = gradient(s);
    const FourierField t1 =
        dealiased_product(dealiased_product(V, gs, Contraction::dot).field, U, Contraction::scalar).field;
    const FourierField t2 =
        dealiased_product(dealiased_product(U, gs, Contraction::dot).field, V, Contraction::scalar).field;
    const FourierField uv = dealiased_product(U, V, Contraction::dot).field;
    const FourierField t3 = dealiased_product(s, gradient(uv), Contraction::scalar).field;
    const FourierField rhs = t1 + t2 + t3;
    return relative(lhs - rhs, rhs);
}

}  // namespace nsr
