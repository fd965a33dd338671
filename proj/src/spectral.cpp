#include "nsrlab/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "nsrlab/fft.hpp"
#include "nsrlab/parallel.hpp"

namespace nsr {

namespace {

const cplx I(0.0, 1.0);

FourierField like(const FourierField& f, int comps) {
    FourierField out(f.lattice(), comps);
    return out;
}

void check_vector(const FourierField& f, const char* where) {
    if (f.components() != 3) throw std::invalid_argument(std::string(where) + ": vector field required");
}

// One application of the fixed time stencil.
FourierField time_diff_once(const FourierField& f) {
    const Lattice& lat = f.lattice();
    const int nt = lat.n_time;
    if (nt < 5) throw std::invalid_argument("derivative: time axis needs n_time >= 5");
    FourierField out = like(f, f.components());
    const double inv = 1.0 / (12.0 * lat.dt());
    const std::size_t S = f.slab_size();
    for (int c = 0; c < f.components(); ++c) {
        auto F = [&](int j) { return f.slab(c, j); };
        for (int j = 0; j < nt; ++j) {
            cplx* o = out.slab(c, j);
            std::array<double, 5> w;
            std::array<int, 5> at;
            if (j == 0) {
                w = {-25, 48, -36, 16, -3};
                at = {0, 1, 2, 3, 4};
            } else if (j == 1) {
                w = {-3, -10, 18, -6, 1};
                at = {0, 1, 2, 3, 4};
            } else if (j == nt - 2) {
                w = {3, 10, -18, 6, -1};
                at = {nt - 1, nt - 2, nt - 3, nt - 4, nt - 5};
            } else if (j == nt - 1) {
                w = {25, -48, 36, -16, 3};
                at = {nt - 1, nt - 2, nt - 3, nt - 4, nt - 5};
            } else {
                w = {1, -8, 0, 8, -1};
                at = {j - 2, j - 1, j, j + 1, j + 2};
            }
            for (std::size_t i = 0; i < S; ++i) {
                cplx acc = 0.0;
                for (int m = 0; m < 5; ++m)
                    if (w[m] != 0.0) acc += w[m] * F(at[m])[i];
                o[i] = acc * inv;
            }
        }
    }
    out.mean_free = f.mean_free;
    out.trace_free = f.trace_free;
    return out;
}

template <class Fn>
void per_mode(const FourierField& f, FourierField& out, Fn&& fn) {
    // fn(k1,k2,k3, in_ptrs(t), out_ptrs(t), idx)
    for (int t = 0; t < f.lattice().n_time; ++t)
        for_each_mode(f.lattice(), [&](std::size_t idx, int k1, int k2, int k3) { fn(t, idx, k1, k2, k3); });
    (void)out;
}

}  // namespace

FourierField derivative(const FourierField& f, Axis axis, int order) {
    if (order < 1) throw std::invalid_argument("derivative: order must be >= 1");
    if (axis == Axis::t) {
        if (order > 4) throw std::invalid_argument("derivative: time order > 4 unsupported");
        FourierField out = time_diff_once(f);
        for (int o = 1; o < order; ++o) out = time_diff_once(out);
        return out;
    }
    const int a = static_cast<int>(axis);
    FourierField out = like(f, f.components());
    per_mode(f, out, [&](int t, std::size_t idx, int k1, int k2, int k3) {
        const int k = a == 0 ? k1 : (a == 1 ? k2 : k3);
        cplx m = std::pow(I * static_cast<double>(k), order);
        for (int c = 0; c < f.components(); ++c) out.slab(c, t)[idx] = m * f.slab(c, t)[idx];
    });
    out.mean_free = true;
    out.trace_free = f.trace_free;
    return out;
}

FourierField time_derivative(const FourierField& f) { return derivative(f, Axis::t, 1); }

FourierField gradient(const FourierField& s) {
    if (s.components() != 1) throw std::invalid_argument("gradient: scalar field required");
    FourierField out = like(s, 3);
    per_mode(s, out, [&](int t, std::size_t idx, int k1, int k2, int k3) {
        const cplx v = s.slab(0, t)[idx];
        out.slab(0, t)[idx] = I * double(k1) * v;
        out.slab(1, t)[idx] = I * double(k2) * v;
        out.slab(2, t)[idx] = I * double(k3) * v;
    });
    out.mean_free = true;
    return out;
}

FourierField divergence(const FourierField& f) {
    if (f.components() == 3) {
        FourierField out = like(f, 1);
        per_mode(f, out, [&](int t, std::size_t idx, int k1, int k2, int k3) {
            out.slab(0, t)[idx] = I * (double(k1) * f.slab(0, t)[idx] + double(k2) * f.slab(1, t)[idx] +
                                       double(k3) * f.slab(2, t)[idx]);
        });
        out.mean_free = true;
        return out;
    }
    if (f.components() == 6) {
        FourierField out = like(f, 3);
        per_mode(f, out, [&](int t, std::size_t idx, int k1, int k2, int k3) {
            const double k[3] = {double(k1), double(k2), double(k3)};
            for (int i = 0; i < 3; ++i) {
                cplx acc = 0.0;
                for (int j = 0; j < 3; ++j) acc += k[j] * f.slab(sym_index(i, j), t)[idx];
                out.slab(i, t)[idx] = I * acc;
            }
        });
        out.mean_free = true;
        return out;
    }
    throw std::invalid_argument("divergence: vector or tensor field required");
}

FourierField curl(const FourierField& v) {
    check_vector(v, "curl");
    FourierField out = like(v, 3);
    per_mode(v, out, [&](int t, std::size_t idx, int k1, int k2, int k3) {
        const cplx a = v.slab(0, t)[idx], b = v.slab(1, t)[idx], c = v.slab(2, t)[idx];
        out.slab(0, t)[idx] = I * (double(k2) * c - double(k3) * b);
        out.slab(1, t)[idx] = I * (double(k3) * a - double(k1) * c);
        out.slab(2, t)[idx] = I * (double(k1) * b - double(k2) * a);
    });
    out.mean_free = true;
    return out;
}

FourierField laplacian(const FourierField& f) {
    FourierField out = like(f, f.components());
    per_mode(f, out, [&](int t, std::size_t idx, int k1, int k2, int k3) {
        const double m = -double(k1 * k1 + k2 * k2 + k3 * k3);
        for (int c = 0; c < f.components(); ++c) out.slab(c, t)[idx] = m * f.slab(c, t)[idx];
    });
    out.mean_free = true;
    out.trace_free = f.trace_free;
    return out;
}

FourierField inverse_laplacian(const FourierField& f) {
    FourierField out = like(f, f.components());
    per_mode(f, out, [&](int t, std::size_t idx, int k1, int k2, int k3) {
        const long k2s = long(k1) * k1 + long(k2) * k2 + long(k3) * k3;
        const double m = k2s == 0 ? 0.0 : -1.0 / double(k2s);
        for (int c = 0; c < f.components(); ++c) out.slab(c, t)[idx] = m * f.slab(c, t)[idx];
    });
    out.mean_free = true;
    out.trace_free = f.trace_free;
    return out;
}

FourierField sym_gradient(const FourierField& v) {
    check_vector(v, "sym_gradient");
    FourierField out = like(v, 6);
    per_mode(v, out, [&](int t, std::size_t idx, int k1, int k2, int k3) {
        const double k[3] = {double(k1), double(k2), double(k3)};
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j)
                out.slab(sym_index(i, j), t)[idx] =
                    0.5 * I * (k[j] * v.slab(i, t)[idx] + k[i] * v.slab(j, t)[idx]);
    });
    out.mean_free = true;
    return out;
}

FourierField leray_project(const FourierField& v) {
    check_vector(v, "leray_project");
    FourierField out = like(v, 3);
    per_mode(v, out, [&](int t, std::size_t idx, int k1, int k2, int k3) {
        const double k[3] = {double(k1), double(k2), double(k3)};
        const double k2s = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        cplx u[3] = {v.slab(0, t)[idx], v.slab(1, t)[idx], v.slab(2, t)[idx]};
        if (k2s > 0.0) {
            const cplx kd = (k[0] * u[0] + k[1] * u[1] + k[2] * u[2]) / k2s;
            for (int i = 0; i < 3; ++i) u[i] -= k[i] * kd;
        }
        for (int i = 0; i < 3; ++i) out.slab(i, t)[idx] = u[i];
    });
    out.mean_free = v.mean_free;
    return out;
}

bool band_contains(const Band& b, long k_sq) {
    const double eps = 1e-9;
    const double ks = static_cast<double>(k_sq);
    switch (b.kind) {
        case Band::leq: return ks <= b.k1 * b.k1 + eps;
        case Band::geq: return k_sq > 0 && ks >= b.k1 * b.k1 - eps;
        case Band::neq0: return k_sq > 0;
        case Band::annulus: return ks >= b.k1 * b.k1 - eps && ks <= b.k2 * b.k2 + eps;
    }
    return false;
}

FourierField freq_project(const FourierField& f, const Band& band) {
    if (band.k1 < 0.0) throw std::invalid_argument("freq_project: negative band edge");
    if (band.kind == Band::annulus && band.k2 < band.k1)
        throw std::invalid_argument("freq_project: invalid band");
    FourierField out = like(f, f.components());
    per_mode(f, out, [&](int t, std::size_t idx, int k1, int k2, int k3) {
        const long k2s = long(k1) * k1 + long(k2) * k2 + long(k3) * k3;
        if (!band_contains(band, k2s)) return;
        for (int c = 0; c < f.components(); ++c) out.slab(c, t)[idx] = f.slab(c, t)[idx];
    });
    out.mean_free = f.mean_free || band.kind != Band::leq;
    out.trace_free = f.trace_free;
    return out;
}

FourierField inverse_divergence(const FourierField& v) {
    check_vector(v, "inverse_divergence");
    FourierField out = like(v, 6);
    per_mode(v, out, [&](int t, std::size_t idx, int k1, int k2, int k3) {
        const double k[3] = {double(k1), double(k2), double(k3)};
        const double k2s = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2s == 0.0) return;
        cplx u[3];
        for (int i = 0; i < 3; ++i) u[i] = -v.slab(i, t)[idx] / k2s;  // Delta^{-1} v
        const cplx s = I * (k[0] * u[0] + k[1] * u[1] + k[2] * u[2]);  // div Delta^{-1} v
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                const double delta = i == j ? 1.0 : 0.0;
                out.slab(sym_index(i, j), t)[idx] =
                    I * k[i] * u[j] + I * k[j] * u[i] - 0.5 * (delta + k[i] * k[j] / k2s) * s;
            }
    });
    out.mean_free = true;
    out.trace_free = true;
    return out;
}

FourierField trace_of(const FourierField& R) {
    if (R.components() != 6) throw std::invalid_argument("trace_of: tensor field required");
    FourierField out = like(R, 1);
    const std::size_t S = R.slab_size();
    for (int t = 0; t < R.lattice().n_time; ++t)
        for (std::size_t i = 0; i < S; ++i)
            out.slab(0, t)[i] = R.slab(0, t)[i] + R.slab(3, t)[i] + R.slab(5, t)[i];
    return out;
}

FourierField trace_free_part(const FourierField& R) {
    FourierField out = R;
    const FourierField tr = trace_of(R);
    const std::size_t S = R.slab_size();
    for (int t = 0; t < R.lattice().n_time; ++t)
        for (int c : {0, 3, 5})
            for (std::size_t i = 0; i < S; ++i) out.slab(c, t)[i] -= tr.slab(0, t)[i] / 3.0;
    out.trace_free = true;
    return out;
}

FourierField mean_part(const FourierField& f) {
    FourierField out = like(f, f.components());
    const std::size_t i0 = f.idx(0, 0, 0);
    for (int t = 0; t < f.lattice().n_time; ++t)
        for (int c = 0; c < f.components(); ++c) out.slab(c, t)[i0] = f.slab(c, t)[i0];
    return out;
}

// ---------------------------------------------------------------- mollifier

double bump(double s) {
    const double u = s / 2.0;
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

namespace {
constexpr int kBumpNodes = 4096;

template <class Fn>
double bump_integral(Fn&& weight) {
    // trapezoid on [0, 2]; the integrand and all its derivatives vanish at 2
    const double h = 2.0 / kBumpNodes;
    double acc = 0.5 * weight(0.0) * bump(0.0);
    for (int i = 1; i < kBumpNodes; ++i) {
        const double s = i * h;
        acc += weight(s) * bump(s);
    }
    return acc * h;
}
}  // namespace

double bump_mass_1d() {
    static const double m = 2.0 * bump_integral([](double) { return 1.0; });
    return m;
}

double bump_mass_3d() {
    static const double m = 4.0 * kPi * bump_integral([](double s) { return s * s; });
    return m;
}

double bump_hat_1d(double xi) {
    return 2.0 * bump_integral([xi](double s) { return std::cos(xi * s); }) / bump_mass_1d();
}

double bump_hat_3d(double xi) {
    if (xi == 0.0) return 1.0;
    return 4.0 * kPi *
           bump_integral([xi](double s) { return s == 0.0 ? 0.0 : s * std::sin(xi * s) / xi; }) /
           bump_mass_3d();
}

std::vector<double> time_mollifier_weights(double dt, double ell) {
    if (!(ell > 0.0) || !(dt > 0.0)) throw std::invalid_argument("time_mollifier_weights: need ell, dt > 0");
    const int reach = static_cast<int>(std::floor(2.0 * ell / dt));
    std::vector<double> w(2 * reach + 1);
    double mass = 0.0;
    for (int m = -reach; m <= reach; ++m) mass += (w[m + reach] = bump(m * dt / ell));
    // reach 0 gives bump(0) alone
    for (double& x : w) x /= mass;
    return w;
}

std::vector<double> mollify_samples(const std::vector<double>& values, double dt, double ell) {
    if (values.size() < 2) return values;
    const std::vector<double> w = time_mollifier_weights(dt, ell);
    const int reach = static_cast<int>(w.size() / 2), n = static_cast<int>(values.size());
    std::vector<double> out(values.size(), 0.0);
    for (int j = 0; j < n; ++j)
        for (int m = -reach; m <= reach; ++m) out[j] += w[m + reach] * values[std::clamp(j - m, 0, n - 1)];
    return out;
}

FourierField mollify(const FourierField& f, double ell, MollifyDomain domain) {
    if (!(ell > 0.0)) throw std::invalid_argument("mollify: ell must be positive");
    if (ell > kPi) throw std::invalid_argument("mollify: ell larger than half the period");
    FourierField out = f;
    const Lattice& lat = f.lattice();
    if (domain != MollifyDomain::time) {
        const int K = lat.K();
        std::vector<double> mult(3 * K * K + 1);
        for (std::size_t q = 0; q < mult.size(); ++q) mult[q] = bump_hat_3d(ell * std::sqrt(double(q)));
        for (int t = 0; t < lat.n_time; ++t)
            for_each_mode(lat, [&](std::size_t idx, int k1, int k2, int k3) {
                const double m = mult[k1 * k1 + k2 * k2 + k3 * k3];
                for (int c = 0; c < f.components(); ++c) out.slab(c, t)[idx] *= m;
            });
    }
    if (domain != MollifyDomain::space && lat.n_time > 1) {
        const std::vector<double> w = time_mollifier_weights(lat.dt(), ell);
        const int reach = static_cast<int>(w.size() / 2);
        FourierField src = out;
        const std::size_t S = f.slab_size();
        for (int c = 0; c < f.components(); ++c)
            for (int j = 0; j < lat.n_time; ++j) {
                cplx* o = out.slab(c, j);
                std::fill(o, o + S, cplx(0.0));
                for (int m = -reach; m <= reach; ++m) {
                    const int jj = std::clamp(j - m, 0, lat.n_time - 1);
                    const double wm = w[m + reach];
                    const cplx* s = src.slab(c, jj);
                    for (std::size_t i = 0; i < S; ++i) o[i] += wm * s[i];
                }
            }
    }
    return out;
}

// ---------------------------------------------------------------- norms

double l2_norm_slice(const FourierField& f, int t) {
    double acc = 0.0;
    for (int c = 0; c < f.components(); ++c) {
        const double cw = (f.components() == 6 && !sym_is_diagonal(c)) ? 2.0 : 1.0;
        const cplx* s = f.slab(c, t);
        for_each_mode(f.lattice(), [&](std::size_t idx, int, int, int k3) {
            acc += cw * half_weight(k3) * std::norm(s[idx]);
        });
    }
    return std::sqrt(acc * kTorusVolume);
}

double l2_norm(const FourierField& f) {
    double m = 0.0;
    for (int t = 0; t < f.lattice().n_time; ++t) m = std::max(m, l2_norm_slice(f, t));
    return m;
}

double mean_inner(const FourierField& f, const FourierField& g, int t) {
    require_same_lattice(f, g, "mean_inner");
    double acc = 0.0;
    for (int c = 0; c < f.components(); ++c) {
        const double cw = (f.components() == 6 && !sym_is_diagonal(c)) ? 2.0 : 1.0;
        const cplx* a = f.slab(c, t);
        const cplx* b = g.slab(c, t);
        for_each_mode(f.lattice(), [&](std::size_t idx, int, int, int k3) {
            acc += cw * half_weight(k3) * (a[idx] * std::conj(b[idx])).real();
        });
    }
    return acc;
}

namespace {

int norm_grid(const FourierField& f, const NormOptions& opt) {
    const int n = f.lattice().n_space;
    return fft_size_at_least(std::max(n, std::max(2, opt.oversample) * n));
}

// Pointwise squared Euclidean (Frobenius for tensors) magnitude accumulated into acc.
void accumulate_sq(const FourierField& f, int t, GridBuffer& buf, std::vector<double>& acc) {
    for (int c = 0; c < f.components(); ++c) {
        const double cw = (f.components() == 6 && !sym_is_diagonal(c)) ? 2.0 : 1.0;
        to_physical(f, c, t, buf);
        const double* r = buf.real();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += cw * r[i] * r[i];
    }
}

double lp_from_sq(const std::vector<double>& sq, double p, int M) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : sq) m = std::max(m, v);
        return std::sqrt(m);
    }
    double acc = 0.0;
    for (double v : sq) acc += std::pow(v, 0.5 * p);
    const double cell = kTorusVolume / (double(M) * M * M);
    return std::pow(acc * cell, 1.0 / p);
}

double lp_norm_slice(const FourierField& f, int t, double p, int M) {
    GridBuffer buf(M);
    std::vector<double> sq(buf.points(), 0.0);
    accumulate_sq(f, t, buf, sq);
    return lp_from_sq(sq, p, M);
}

double grad_lp_norm_slice(const FourierField& f, int t, double p, int M) {
    GridBuffer buf(M);
    std::vector<double> sq(buf.points(), 0.0);
    const FourierField slice = f.time_slice(t);
    for (Axis a : {Axis::x1, Axis::x2, Axis::x3}) accumulate_sq(derivative(slice, a, 1), 0, buf, sq);
    return lp_from_sq(sq, p, M);
}

}  // namespace

double l1_norm_slice(const FourierField& f, int t, const NormOptions& opt) {
    const int M = norm_grid(f, opt);
    GridBuffer buf(M);
    std::vector<double> sq(buf.points(), 0.0);
    accumulate_sq(f, t, buf, sq);
    return lp_from_sq(sq, 1.0, M);
}

std::vector<double> lp_norms_slice(const std::vector<const FourierField*>& parts, int t,
                                   const std::vector<double>& ps, const NormOptions& opt) {
    if (parts.empty()) throw std::invalid_argument("lp_norms_slice: no fields");
    for (const FourierField* f : parts) require_same_lattice(*parts[0], *f, "lp_norms_slice");
    for (double p : ps)
        if (!(p >= 1.0)) throw std::invalid_argument("lp_norms_slice: p must be >= 1");
    const int M = norm_grid(*parts[0], opt);
    GridBuffer buf(M);
    std::vector<double> sq(buf.points(), 0.0);
    for (const FourierField* f : parts) accumulate_sq(*f, t, buf, sq);
    std::vector<double> out;
    for (double p : ps) out.push_back(lp_from_sq(sq, p, M));
    return out;
}

double l1_norm(const FourierField& f, const NormOptions& opt) {
    std::vector<double> per_t(f.lattice().n_time, 0.0);
    parallel_for(f.lattice().n_time, [&](int t) { per_t[t] = l1_norm_slice(f, t, opt); });
    return *std::max_element(per_t.begin(), per_t.end());
}

double norm(const FourierField& f, const NormSpec& spec, const NormOptions& opt) {
    const Lattice& lat = f.lattice();
    switch (spec.kind) {
        case NormSpec::Lp:
        case NormSpec::W1p: {
            if (!(spec.p > 1.0)) throw std::invalid_argument("norm: p must exceed 1");
            const int M = norm_grid(f, opt);
            std::vector<double> per_t(lat.n_time, 0.0);
            parallel_for(lat.n_time, [&](int t) {
                double v = lp_norm_slice(f, t, spec.p, M);
                if (spec.kind == NormSpec::W1p) v += grad_lp_norm_slice(f, t, spec.p, M);
                per_t[t] = v;
            });
            return *std::max_element(per_t.begin(), per_t.end());
        }
        case NormSpec::Hs: {
            double best = 0.0;
            for (int t = 0; t < lat.n_time; ++t) {
                double acc = 0.0;
                for (int c = 0; c < f.components(); ++c) {
                    const double cw = (f.components() == 6 && !sym_is_diagonal(c)) ? 2.0 : 1.0;
                    const cplx* s = f.slab(c, t);
                    for_each_mode(lat, [&](std::size_t idx, int k1, int k2, int k3) {
                        const double w = std::pow(1.0 + double(k1 * k1 + k2 * k2 + k3 * k3), spec.s);
                        acc += cw * half_weight(k3) * w * std::norm(s[idx]);
                    });
                }
                best = std::max(best, std::sqrt(acc * kTorusVolume));
            }
            return best;
        }
        case NormSpec::CN: {
            if (spec.N < 0 || spec.N > 3) throw std::invalid_argument("norm: C^N needs N in 0..3");
            const int M = norm_grid(f, opt);
            const bool with_time = lat.n_time >= 5;
            double total = 0.0;
            for (int j = 0; j <= spec.N; ++j) {
                double order_max = 0.0;
                for (int m = 0; m <= (with_time ? j : 0); ++m) {
                    FourierField base = m == 0 ? f : derivative(f, Axis::t, m);
                    const int s = j - m;
                    for (int a1 = 0; a1 <= s; ++a1)
                        for (int a2 = 0; a1 + a2 <= s; ++a2) {
                            const int a3 = s - a1 - a2;
                            FourierField d = base;
                            if (a1) d = derivative(d, Axis::x1, a1);
                            if (a2) d = derivative(d, Axis::x2, a2);
                            if (a3) d = derivative(d, Axis::x3, a3);
                            std::vector<double> per_t(lat.n_time, 0.0);
                            parallel_for(lat.n_time, [&](int t) {
                                per_t[t] = lp_norm_slice(d, t, std::numeric_limits<double>::infinity(), M);
                            });
                            order_max = std::max(order_max, *std::max_element(per_t.begin(), per_t.end()));
                        }
                }
                total += order_max;
            }
            return total;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------- products

int bandwidth(const FourierField& f) {
    int b = 0;
    for (int c = 0; c < f.components(); ++c)
        for (int t = 0; t < f.lattice().n_time; ++t) {
            const cplx* s = f.slab(c, t);
            for_each_mode(f.lattice(), [&](std::size_t idx, int k1, int k2, int k3) {
                if (s[idx] != cplx(0.0, 0.0))
                    b = std::max(b, std::max(std::abs(k1), std::max(std::abs(k2), k3)));
            });
        }
    return b;
}

ProductResult dealiased_product(const FourierField& f, const FourierField& g, Contraction con) {
    const Lattice& lf = f.lattice();
    const Lattice& lg = g.lattice();
    if (lf.n_space != lg.n_space) throw std::invalid_argument("dealiased_product: lattice mismatch");
    if (lf.n_time != lg.n_time && lf.n_time != 1 && lg.n_time != 1)
        throw std::invalid_argument("dealiased_product: time axes differ");
    const Lattice lat = lf.n_time >= lg.n_time ? lf : lg;
    const int fc = f.components(), gc = g.components();
    int oc = 0;
    switch (con) {
        case Contraction::scalar:
            if (fc != 1 && gc != 1) throw std::invalid_argument("dealiased_product: scalar needs a scalar factor");
            oc = std::max(fc, gc);
            break;
        case Contraction::outer:
            if (fc != 3 || gc != 3) throw std::invalid_argument("dealiased_product: outer needs vectors");
            oc = 6;
            break;
        case Contraction::dot:
            if (fc != gc) throw std::invalid_argument("dealiased_product: dot needs equal shapes");
            oc = 1;
            break;
        case Contraction::matvec:
            if (fc != 6 || gc != 3) throw std::invalid_argument("dealiased_product: matvec needs tensor, vector");
            oc = 3;
            break;
        case Contraction::cross:
            if (fc != 3 || gc != 3) throw std::invalid_argument("dealiased_product: cross needs vectors");
            oc = 3;
            break;
    }
    const int bf = bandwidth(f), bg = bandwidth(g);
    const int M = fft_size_at_least(std::max(lat.n_space, 2 * (bf + bg) + 1));
    ProductResult res{FourierField(lat, oc), 0.0};
    std::vector<double> loss(lat.n_time, 0.0);
    parallel_for(lat.n_time, [&](int t) {
        const int tf = lf.n_time == 1 ? 0 : t, tg = lg.n_time == 1 ? 0 : t;
        std::vector<GridBuffer> F, G;
        F.reserve(fc);
        G.reserve(gc);
        for (int c = 0; c < fc; ++c) {
            F.emplace_back(M);
            to_physical(f, c, tf, F.back());
        }
        for (int c = 0; c < gc; ++c) {
            G.emplace_back(M);
            to_physical(g, c, tg, G.back());
        }
        GridBuffer out(M);
        const std::size_t P = out.points();
        double* o = out.real();
        for (int c = 0; c < oc; ++c) {
            switch (con) {
                case Contraction::scalar: {
                    const double* a = fc == 1 ? F[0].real() : F[c].real();
                    const double* b = fc == 1 ? G[gc == 1 ? 0 : c].real() : G[0].real();
                    for (std::size_t i = 0; i < P; ++i) o[i] = a[i] * b[i];
                    break;
                }
                case Contraction::outer: {
                    static const int ii[6] = {0, 0, 0, 1, 1, 2}, jj[6] = {0, 1, 2, 1, 2, 2};
                    const double *a1 = F[ii[c]].real(), *b1 = G[jj[c]].real();
                    const double *a2 = F[jj[c]].real(), *b2 = G[ii[c]].real();
                    for (std::size_t i = 0; i < P; ++i) o[i] = 0.5 * (a1[i] * b1[i] + a2[i] * b2[i]);
                    break;
                }
                case Contraction::dot: {
                    std::fill(o, o + P, 0.0);
                    for (int k = 0; k < fc; ++k) {
                        const double w = (fc == 6 && !sym_is_diagonal(k)) ? 2.0 : 1.0;
                        const double *a = F[k].real(), *b = G[k].real();
                        for (std::size_t i = 0; i < P; ++i) o[i] += w * a[i] * b[i];
                    }
                    break;
                }
                case Contraction::matvec: {
                    std::fill(o, o + P, 0.0);
                    for (int j = 0; j < 3; ++j) {
                        const double *a = F[sym_index(c, j)].real(), *b = G[j].real();
                        for (std::size_t i = 0; i < P; ++i) o[i] += a[i] * b[i];
                    }
                    break;
                }
                case Contraction::cross: {
                    const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
                    const double *a1 = F[c1].real(), *b2 = G[c2].real();
                    const double *a2 = F[c2].real(), *b1 = G[c1].real();
                    for (std::size_t i = 0; i < P; ++i) o[i] = a1[i] * b2[i] - a2[i] * b1[i];
                    break;
                }
            }
            loss[t] += from_physical(out, res.field, c, t);
        }
    });
    for (double l : loss) res.truncation_loss += l;
    return res;
}

// ---------------------------------------------------------------- residual

ResidualResult nsr_residual(const FourierField& v, const FourierField& p, const FourierField& R, double nu) {
    if (v.components() != 3 || p.components() != 1 || R.components() != 6)
        throw std::invalid_argument("nsr_residual: shape mismatch");
    if (v.lattice() != p.lattice() || v.lattice() != R.lattice())
        throw std::invalid_argument("nsr_residual: shape mismatch");
    const FourierField dtv = time_derivative(v);
    const FourierField adv = divergence(dealiased_product(v, v, Contraction::outer).field);
    const FourierField gp = gradient(p);
    FourierField visc = laplacian(v);
    visc *= nu;
    const FourierField divR = divergence(R);
    ResidualResult out;
    out.field = dtv + adv + gp - visc - divR;
    for (int t = 0; t < v.lattice().n_time; ++t) {
        out.absolute = std::max(out.absolute, l2_norm_slice(out.field, t));
        for (const FourierField* term : std::initializer_list<const FourierField*>{&dtv, &adv, &gp, &visc, &divR})
            out.scale = std::max(out.scale, l2_norm_slice(*term, t));
    }
    out.relative = out.scale > 0.0 ? out.absolute / out.scale : 0.0;
    return out;
}

}  // namespace nsr
