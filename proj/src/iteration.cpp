#include "nsrlab/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nsrlab/audit.hpp"
#include "nsrlab/fft.hpp"

namespace nsr {

namespace {

double rational_to_double(const Rational& r) { return static_cast<double>(r.numerator()) / r.denominator(); }

// a^(b^q) as a natural logarithm; throws when exp() of it would overflow.
double log_lambda(const ParameterSchedule& s, int q) {
    const double lg = std::pow(static_cast<double>(s.b), q) * std::log(static_cast<double>(s.a));
    if (!(lg < 700.0))
        throw std::domain_error("schedule: lambda_" + std::to_string(q) +
                                " = a^(b^q) is not representable; supply a desk override");
    return lg;
}

// scalar field times a constant vector
FourierField times_vector(const FourierField& s, const Vec3& xi) {
    FourierField out(s.lattice(), 3);
    const std::size_t S = s.slab_size();
    for (int c = 0; c < 3; ++c)
        for (int t = 0; t < s.lattice().n_time; ++t) {
            const cplx* a = s.slab(0, t);
            cplx* o = out.slab(c, t);
            for (std::size_t i = 0; i < S; ++i) o[i] = xi[c] * a[i];
        }
    out.mean_free = s.mean_free;
    return out;
}

FourierField nonzero(const FourierField& f) { return freq_project(f, Band::nonzero()); }

double ratio(double a, double b) { return b > 0.0 ? a / b : 0.0; }

// Navier-Stokes left-hand side without the stress: d_t v + div(v (x) v) + grad p - nu Lap v.
FourierField nse_lhs(const FourierField& v, const FourierField& vv, const FourierField& p, double nu) {
    FourierField out = time_derivative(v);
    out += divergence(vv);
    out += gradient(p);
    FourierField visc = laplacian(v);
    visc *= nu;
    out -= visc;
    return out;
}

std::vector<double> l2_per_time(const FourierField& f) {
    std::vector<double> out(f.lattice().n_time);
    for (int t = 0; t < f.lattice().n_time; ++t) out[t] = l2_norm_slice(f, t);
    return out;
}

// Nodal values of one component of f at time t on the n^3 collocation grid.
std::vector<double> nodal(const FourierField& f, int c, int t) {
    GridBuffer buf(f.lattice().n_space);
    to_physical(f, c, t, buf);
    return std::vector<double>(buf.real(), buf.real() + buf.points());
}

// Interpolant of nodal values (one per time sample) on lattice `coarse`.
FourierField from_nodes(const std::vector<std::vector<double>>& values, const Lattice& coarse) {
    FourierField out(coarse, 1);
    GridBuffer buf(coarse.n_space);
    for (int t = 0; t < coarse.n_time; ++t) {
        std::copy(values[t].begin(), values[t].end(), buf.real());
        from_physical(buf, out, 0, t);
    }
    return out;
}

std::array<int, 3> node_index(std::size_t point, int n) {
    const int i3 = static_cast<int>(point % n);
    const int i2 = static_cast<int>((point / n) % n);
    const int i1 = static_cast<int>(point / (static_cast<std::size_t>(n) * n));
    return {i1, i2, i3};
}

}  // namespace

// ------------------------------------------------------------------ schedule

LevelParams ParameterSchedule::level(int q) const {
    LevelParams L;
    if (q >= 0 && q < static_cast<int>(desk.size())) {
        const DeskLevel& d = desk[q];
        L.lambda_q = d.lambda_q;
        L.delta_q = d.delta_q;
        L.lambda_next = d.lambda_next;
        L.delta_next = d.delta_next;
        L.delta_next2 = d.delta_next2;
        L.ell = d.ell;
        const double ls = d.lambda_next * d.sigma;
        const long rounded = std::lround(ls);
        if (rounded < 1 || std::abs(ls - rounded) > 1e-9)
            throw std::invalid_argument("schedule: lambda_{q+1} * sigma must be a positive integer");
        L.waves = WaveParams{d.lambda_next, static_cast<int>(rounded), d.r, d.mu};
        L.overridden = true;
        return L;
    }
    if (q < 0) throw std::invalid_argument("schedule: negative level");
    const double b2 = 2.0 * rational_to_double(beta);
    const double lq = log_lambda(*this, q), l1 = log_lambda(*this, 1), ln = log_lambda(*this, q + 1),
                 ln2 = log_lambda(*this, q + 2);
    L.lambda_q = std::exp(lq);
    L.lambda_next = std::exp(ln);
    L.delta_q = std::exp(1.5 * b2 * l1 - b2 * lq);
    L.delta_next = std::exp(1.5 * b2 * l1 - b2 * ln);
    L.delta_next2 = std::exp(1.5 * b2 * l1 - b2 * ln2);
    L.ell = std::exp(-20.0 * lq);
    if (L.lambda_next > std::numeric_limits<int>::max())
        throw std::domain_error("schedule: lambda_{q+1} exceeds the lattice integer range");
    L.waves.lambda = static_cast<int>(std::lround(L.lambda_next));
    L.waves.lambda_sigma = std::max(1, static_cast<int>(std::lround(std::exp(ln / 16.0))));
    L.waves.r = std::max(1, static_cast<int>(std::lround(std::exp(0.75 * ln))));
    L.waves.mu = std::exp(1.25 * ln);
    return L;
}

// ------------------------------------------------------------------ state

IterationState zero_state(const Lattice& lat, double nu) {
    IterationState s;
    s.v = FourierField(lat, 3);
    s.p = FourierField(lat, 1);
    s.R = FourierField(lat, 6);
    s.v.mean_free = true;
    s.R.trace_free = true;
    s.nu = nu;
    return s;
}

void validate_state(const IterationState& s, double tol) {
    if (s.v.components() != 3 || s.p.components() != 1 || s.R.components() != 6)
        throw std::invalid_argument("state: wrong component counts");
    if (s.v.lattice() != s.p.lattice() || s.v.lattice() != s.R.lattice())
        throw std::invalid_argument("state: fields live on different lattices");
    if (!(s.nu > 0.0 && s.nu <= 1.0)) throw std::invalid_argument("state: nu must lie in (0, 1]");
    const FourierField dv = divergence(s.v);
    const FourierField gv = sym_gradient(s.v);
    const std::size_t i0 = s.v.idx(0, 0, 0);
    for (int t = 0; t < s.v.lattice().n_time; ++t) {
        const double scale = std::max(l2_norm_slice(gv, t), 1e-300);
        if (l2_norm_slice(dv, t) > tol * scale)
            throw std::invalid_argument("state: v is not divergence-free at sample " + std::to_string(t));
        for (int c = 0; c < 3; ++c)
            if (std::abs(s.v.slab(c, t)[i0]) > tol * std::max(1.0, l2_norm_slice(s.v, t)))
                throw std::invalid_argument("state: v has a nonzero mean at sample " + std::to_string(t));
        const FourierField tr = trace_of(s.R.time_slice(t));
        if (l2_norm(tr) > tol * std::max(1.0, l2_norm_slice(s.R, t)))
            throw std::invalid_argument("state: R is not trace-free at sample " + std::to_string(t));
    }
}

FourierField prescribed_stress(const Lattice& lat) {
    if (lat.K() < 1) throw std::invalid_argument("prescribed_stress: lattice needs K >= 1");
    FourierField S(lat, 6);
    for (int t = 0; t < lat.n_time; ++t) {
        // constant trace-free part
        S.set_mode(sym_index(0, 0), t, 0, 0, 0, 0.6);
        S.set_mode(sym_index(1, 1), t, 0, 0, 0, -0.4);
        S.set_mode(sym_index(2, 2), t, 0, 0, 0, -0.2);
        S.set_mode(sym_index(0, 1), t, 0, 0, 0, 0.25);
        // cosine modes with A k = 0 and tr A = 0: k = e1, e2, e3
        S.add_mode(sym_index(1, 1), t, 1, 0, 0, 0.15);
        S.add_mode(sym_index(2, 2), t, 1, 0, 0, -0.15);
        S.add_mode(sym_index(1, 2), t, 1, 0, 0, 0.1);
        S.add_mode(sym_index(0, 2), t, 0, 1, 0, cplx(0.0, 0.12));
        S.add_mode(sym_index(0, 0), t, 0, 0, 1, 0.1);
        S.add_mode(sym_index(1, 1), t, 0, 0, 1, -0.1);
    }
    S.trace_free = true;
    S.mean_free = false;
    const double sup = norm(S, NormSpec::linf());
    S *= 1.0 / sup;
    return S;
}

IterationState prescribed_state(const Lattice& lat, double nu, const InitialData& d) {
    IterationState s = zero_state(lat, nu);
    if (d.velocity_amplitude != 0.0) {
        if (lat.K() < 1) throw std::invalid_argument("prescribed_state: lattice needs K >= 1");
        for (int t = 0; t < lat.n_time; ++t) {
            const double g = d.velocity_amplitude * (1.0 + d.modulation * std::sin(d.omega * lat.time(t)));
            // (sin z + cos y, sin x + cos z, sin y + cos x)
            s.v.add_mode(0, t, 0, 0, 1, cplx(0.0, -0.5 * g));
            s.v.add_mode(0, t, 0, 1, 0, 0.5 * g);
            s.v.add_mode(1, t, 1, 0, 0, cplx(0.0, -0.5 * g));
            s.v.add_mode(1, t, 0, 0, 1, 0.5 * g);
            s.v.add_mode(2, t, 0, 1, 0, cplx(0.0, -0.5 * g));
            s.v.add_mode(2, t, 1, 0, 0, 0.5 * g);
        }
        const FourierField vv = dealiased_product(s.v, s.v, Contraction::outer).field;
        const FourierField F = nse_lhs(s.v, vv, s.p, nu);
        s.p = -1.0 * inverse_laplacian(divergence(F));
        s.R = inverse_divergence(leray_project(F));
    }
    if (d.stress_amplitude != 0.0) {
        FourierField S = prescribed_stress(lat);
        S *= d.stress_amplitude;
        s.R += S;
    }
    s.R.trace_free = true;
    return s;
}

// ------------------------------------------------------------------ mollification

Mollified mollify_state(const IterationState& s, double ell, const NormOptions& norms) {
    Mollified m;
    m.v = mollify(s.v, ell, MollifyDomain::both);
    m.R = mollify(s.R, ell, MollifyDomain::both);
    m.R.trace_free = true;
    const FourierField p_raw = mollify(s.p, ell, MollifyDomain::both);

    ProductResult vv = dealiased_product(s.v, s.v, Contraction::outer);
    ProductResult vlvl = dealiased_product(m.v, m.v, Contraction::outer);
    m.truncation_loss = vv.truncation_loss + vlvl.truncation_loss;
    FourierField A = vlvl.field - mollify(vv.field, ell, MollifyDomain::both);
    m.commutator = trace_free_part(A);
    FourierField tr = trace_of(A);
    tr *= 1.0 / 3.0;
    m.p = p_raw - tr;

    m.defect = nse_lhs(m.v, vlvl.field, m.p, s.nu);
    m.defect -= divergence(m.R + m.commutator);

    m.commutator_sup = norm(m.commutator, NormSpec::linf(), norms);
    const double vc1 = norm(s.v, NormSpec::cn(1), norms), vinf = norm(s.v, NormSpec::linf(), norms);
    m.commutator_constant = ratio(m.commutator_sup, ell * vc1 * vinf);
    return m;
}

// ------------------------------------------------------------------ cutoffs

double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double f = std::exp(-1.0 / s), g = std::exp(-1.0 / (1.0 - s));
    return f / (f + g);
}

double cutoff_squared(int i, double y) {
    const double u = std::log(y) / std::log(4.0);
    auto S = [](double x) { return smooth_step(2.0 * x - 1.0); };
    if (i == 0) return 1.0 - S(u);
    return std::max(0.0, S(u - i + 1) - S(u - i));
}

FourierField CutoffFamily::chi_field(int i) const {
    Lattice coarse = stress.lattice();
    return from_nodes(nodes.at(i), coarse);
}

CutoffFamily stress_cutoffs(const FourierField& R_ell, const LevelParams& L, const ParameterSchedule& sched,
                            int amp_modes) {
    if (R_ell.components() != 6) throw std::invalid_argument("stress_cutoffs: tensor field required");
    if (amp_modes < 1) throw std::invalid_argument("stress_cutoffs: amplitude bandwidth must be >= 1");
    CutoffFamily cut;
    const Lattice& lat = R_ell.lattice();
    cut.n_amp = std::min(2 * amp_modes + 1, lat.n_space);
    cut.stress = resample(R_ell, cut.n_amp);
    const double lam_eps = std::pow(L.lambda_q, -sched.eps_R);
    cut.scale = 100.0 * lam_eps * L.delta_next;
    // 4^{i+1} <= lambda_q^11 / delta_{q+1}
    cut.i_max = static_cast<int>(std::floor((11.0 * std::log(L.lambda_q) - std::log(L.delta_next)) / std::log(4.0))) - 1;

    const int nt = lat.n_time;
    const std::size_t P = static_cast<std::size_t>(cut.n_amp) * cut.n_amp * cut.n_amp;
    std::vector<std::vector<double>> mag(nt, std::vector<double>(P, 0.0)), y(nt, std::vector<double>(P));
    double u_max = 0.0;
    for (int t = 0; t < nt; ++t) {
        for (int c = 0; c < 6; ++c) {
            const std::vector<double> r = nodal(cut.stress, c, t);
            const double w = sym_is_diagonal(c) ? 1.0 : 2.0;
            for (std::size_t j = 0; j < P; ++j) mag[t][j] += w * r[j] * r[j];
        }
        for (std::size_t j = 0; j < P; ++j) {
            mag[t][j] = std::sqrt(mag[t][j]);
            const double a = mag[t][j] / cut.scale;
            y[t][j] = std::sqrt(1.0 + a * a);
            u_max = std::max(u_max, std::log(y[t][j]) / std::log(4.0));
        }
    }
    // chi_i vanishes once u <= i - 1/2
    const int top = static_cast<int>(std::floor(u_max + 0.5)) + 1;
    cut.nodes.assign(top + 1, std::vector<std::vector<double>>(nt, std::vector<double>(P, 0.0)));
    cut.chi_sq_integral.assign(top + 1, std::vector<double>(nt, 0.0));
    cut.stress_sup_on_chi0.assign(nt, 0.0);
    cut.stress_sup_point.assign(nt, {0, 0, 0});
    int count = 1;
    for (int t = 0; t < nt; ++t)
        for (std::size_t j = 0; j < P; ++j) {
            double sum = 0.0;
            for (int i = 0; i <= top; ++i) {
                const double c2 = cutoff_squared(i, y[t][j]);
                cut.nodes[i][t][j] = std::sqrt(c2);
                cut.chi_sq_integral[i][t] += c2;
                sum += c2;
                if (c2 > 0.0) count = std::max(count, i + 1);
            }
            cut.partition_residual = std::max(cut.partition_residual, std::abs(sum - 1.0));
            for (int i = 0; i <= top; ++i)
                for (int k = i + 2; k <= top; ++k)
                    cut.disjointness = std::max(cut.disjointness, cut.nodes[i][t][j] * cut.nodes[k][t][j]);
            if (cut.nodes[0][t][j] > 0.0 && mag[t][j] > cut.stress_sup_on_chi0[t]) {
                cut.stress_sup_on_chi0[t] = mag[t][j];
                cut.stress_sup_point[t] = node_index(j, cut.n_amp);
            }
        }
    cut.count = count;
    cut.nodes.resize(count);
    cut.chi_sq_integral.resize(count);
    for (auto& row : cut.chi_sq_integral)
        for (double& v : row) v *= kTorusVolume / static_cast<double>(P);
    cut.rho.assign(count, 0.0);
    for (int i = 1; i < count; ++i) cut.rho[i] = lam_eps * L.delta_next * std::pow(4.0, i + sched.c0);
    cut.i_max_exceeded = count - 1 > cut.i_max;
    if (cut.partition_residual > 1e-8)
        throw std::runtime_error("stress_cutoffs: partition of unity residual " +
                                 std::to_string(cut.partition_residual));
    return cut;
}

// ------------------------------------------------------------------ amplitudes

AmplitudeSet amplitudes(const CutoffFamily& cut, const std::vector<double>& rho0, const DirectionSet& dirs,
                        const Lattice& lat) {
    const Lattice& coarse = cut.stress.lattice();
    const int nt = coarse.n_time;
    if (static_cast<int>(rho0.size()) != nt) throw std::invalid_argument("amplitudes: rho0 size mismatch");
    if (cut.count > 1 && dirs.size() < 2)
        throw std::invalid_argument("amplitudes: overlapping cutoffs need two direction families");
    const std::size_t P = static_cast<std::size_t>(cut.n_amp) * cut.n_amp * cut.n_amp;
    AmplitudeSet out;
    // values[family][k][t][point]
    std::vector<std::vector<std::vector<std::vector<double>>>> values(
        2, std::vector<std::vector<std::vector<double>>>(6, std::vector<std::vector<double>>(nt, std::vector<double>(P, 0.0))));
    std::array<bool, 2> used{false, false};
    for (int i = 0; i < cut.count; ++i) used[i % 2] = true;

    double target_scale = 0.0;
    for (int t = 0; t < nt; ++t) {
        std::array<std::vector<double>, 6> R;
        for (int c = 0; c < 6; ++c) R[c] = nodal(cut.stress, c, t);
        for (std::size_t j = 0; j < P; ++j) {
            Sym3 Rj;
            for (int c = 0; c < 6; ++c) Rj[c] = R[c][j];
            const double Rn = frobenius(Rj);
            Sym3 lhs{}, target{};
            double chi_rho = 0.0;
            for (int i = 0; i < cut.count; ++i) {
                const double chi = cut.nodes[i][t][j];
                if (chi == 0.0) continue;
                const double rho = i == 0 ? rho0[t] : cut.rho[i];
                chi_rho += rho * chi * chi;
                if (rho == 0.0) {
                    if (Rn == 0.0) continue;  // a = 0 here
                    throw GammaDomainViolation("amplitudes: rho_0 = 0 where R_ell != 0", node_index(j, cut.n_amp), t, i);
                }
                const double q = Rn / rho;
                out.gamma_ratio_max = std::max(out.gamma_ratio_max, q);
                if (dirs.eps_gamma > 0.0 && q > dirs.eps_gamma) {
                    std::ostringstream msg;
                    msg << "amplitudes: |R_ell|/rho_" << i << " = " << q << " exceeds eps_gamma = " << dirs.eps_gamma;
                    throw GammaDomainViolation(msg.str(), node_index(j, cut.n_amp), t, i);
                }
                Sym3 M = identity_sym();
                for (int c = 0; c < 6; ++c) M[c] -= Rj[c] / rho;
                const Family& fam = dirs.families[i % 2];
                std::array<double, 12> g;
                try {
                    g = gamma(M, fam);
                } catch (const std::domain_error& e) {
                    throw GammaDomainViolation(std::string("amplitudes: ") + e.what(), node_index(j, cut.n_amp), t, i);
                }
                const double s = std::sqrt(rho) * chi;
                for (int k = 0; k < 6; ++k) {
                    values[i % 2][k][t][j] += s * g[k];
                    out.a_constant = std::max(out.a_constant, chi * g[k]);
                }
            }
            // sum over Lambda^+ of a^2 (Id - xi xi) against sum rho_i chi_i^2 Id - R
            for (int f = 0; f < 2; ++f) {
                if (!used[f]) continue;
                const Family& fam = dirs.families[f];
                for (int k = 0; k < 6; ++k) {
                    const double a2 = values[f][k][t][j] * values[f][k][t][j];
                    const Vec3 xi = fam.dirs[k].xi_d();
                    for (int a = 0; a < 3; ++a)
                        for (int b = a; b < 3; ++b)
                            lhs[sym_index(a, b)] += a2 * ((a == b ? 1.0 : 0.0) - xi[a] * xi[b]);
                }
            }
            const bool active = chi_rho > 0.0;
            for (int c = 0; c < 6; ++c)
                target[c] = (sym_is_diagonal(c) ? chi_rho : 0.0) - (active ? Rj[c] : 0.0);
            Sym3 diff;
            for (int c = 0; c < 6; ++c) diff[c] = lhs[c] - target[c];
            out.wwid_node_residual = std::max(out.wwid_node_residual, frobenius(diff));
            target_scale = std::max(target_scale, frobenius(target));
        }
    }
    if (target_scale > 0.0) out.wwid_node_residual /= target_scale;
    for (int f = 0; f < 2; ++f) {
        if (!used[f]) continue;
        out.families_used.push_back(f);
        for (int k = 0; k < 6; ++k) out.a[f][k] = resample(from_nodes(values[f][k], coarse), lat.n_space);
    }
    return out;
}

// ------------------------------------------------------------------ perturbation

Perturbation assemble_perturbation(const AmplitudeSet& amps, const DirectionSet& dirs, const WaveParams& waves,
                                   const Lattice& lat) {
    Perturbation out;
    out.wp = FourierField(lat, 3);
    out.wc = FourierField(lat, 3);
    FourierField Q(lat, 3);
    double loss = 0.0;
    const long long N = dirs.N_Lambda;
    for (int f : amps.families_used) {
        const Family& fam = dirs.families[f];
        for (int k = 0; k < 6; ++k) {
            const FourierField& a = amps.a[f][k];
            if (bandwidth(a) == 0 && l2_norm(a) == 0.0) continue;
            const Direction& d = fam.dirs[k];
            const FourierField P = intermittent_pair(lat, d, waves, N);
            const FourierField U = beltrami_pair(lat, d, waves.lambda);
            const FourierField et = eta(lat, d, waves, N);
            ProductResult ap = dealiased_product(a, P, Contraction::scalar);
            ProductResult ae = dealiased_product(a, et, Contraction::scalar);
            ProductResult wc = dealiased_product(gradient(ae.field), U, Contraction::cross);
            ProductResult ae2 = dealiased_product(ae.field, ae.field, Contraction::scalar);
            loss += ap.truncation_loss + ae.truncation_loss + wc.truncation_loss + ae2.truncation_loss;
            out.wp += ap.field;
            wc.field *= 1.0 / waves.lambda;
            out.wc += wc.field;
            Q += times_vector(ae2.field, d.xi_d());
        }
    }
    Q = nonzero(Q);
    Q *= 1.0 / waves.mu;
    out.wt_potential = inverse_laplacian(divergence(Q));
    out.wt = leray_project(Q);
    out.w = out.wp + out.wc + out.wt;
    out.wp.mean_free = out.wc.mean_free = out.wt.mean_free = out.w.mean_free = true;

    const double wn = l2_norm(out.w);
    FourierField curl_form = curl(out.wp);
    curl_form *= 1.0 / waves.lambda;
    out.curl_form_residual = ratio(l2_norm(out.wp + out.wc - curl_form), wn);
    out.div_residual = ratio(l2_norm(divergence(out.wp + out.wc)), wn);
    out.div_w_residual = ratio(l2_norm(divergence(out.w)), l2_norm(sym_gradient(out.w)));
    out.truncation_loss = ratio(loss, wn * wn);
    out.wp_energy = l2_per_time(out.wp);
    for (double& e : out.wp_energy) e *= e;
    if (out.div_w_residual > 1e-9)
        throw std::runtime_error("assemble_perturbation: div w = " + std::to_string(out.div_w_residual) +
                                 " relative");
    return out;
}

PeanutsCheck peanuts_check(const AmplitudeSet& amps, const DirectionSet& dirs, const WaveParams& waves,
                           const Lattice& lat, const FourierField& wt) {
    FourierField lhs(lat, 3), gradients(lat, 3), rest(lat, 3), dtwt(lat, 3);
    const long long N = dirs.N_Lambda;
    const double inv_mu = 1.0 / waves.mu;
    for (int f : amps.families_used) {
        const Family& fam = dirs.families[f];
        for (int k = 0; k < 6; ++k) {
            const FourierField& a = amps.a[f][k];
            if (l2_norm(a) == 0.0) continue;
            const Direction& d = fam.dirs[k];
            const Vec3 xi = d.xi_d();
            const FourierField et = eta(lat, d, waves, N);
            const FourierField et_t = eta_time_derivative(lat, d, waves, N);
            const FourierField g = dealiased_product(et, et, Contraction::scalar).field;        // eta^2
            FourierField gt = dealiased_product(et, et_t, Contraction::scalar).field;           // d_t eta^2
            gt *= 2.0;
            const FourierField a2 = dealiased_product(a, a, Contraction::scalar).field;
            const FourierField a2t = time_derivative(a2);
            const FourierField gz = nonzero(g);
            // product rule: d_t(a^2 eta^2) with the exact derivative on eta^2
            FourierField dt_ae = dealiased_product(a2t, g, Contraction::scalar).field;
            dt_ae += dealiased_product(a2, gt, Contraction::scalar).field;

            // E(xi, -xi, 2) = P_{!=0}(a^2 grad eta^2 - a^2 (xi/mu) d_t eta^2)
            FourierField e2 = dealiased_product(a2, gradient(g), Contraction::scalar).field;
            FourierField drift = times_vector(dealiased_product(a2, gt, Contraction::scalar).field, xi);
            drift *= inv_mu;
            e2 -= drift;
            lhs += nonzero(e2);

            FourierField dq = times_vector(dt_ae, xi);
            dq *= inv_mu;
            dtwt += leray_project(nonzero(dq));

            gradients += gradient(dealiased_product(a2, gz, Contraction::scalar).field);
            gradients -= gradient(inverse_laplacian(divergence(dq)));
            rest -= nonzero(dealiased_product(gz, gradient(a2), Contraction::scalar).field);
            FourierField tail = times_vector(dealiased_product(g, a2t, Contraction::scalar).field, xi);
            tail *= inv_mu;
            rest += nonzero(tail);
        }
    }
    lhs += dtwt;
    PeanutsCheck out;
    const double scale = std::max({l2_norm(lhs), l2_norm(gradients), l2_norm(rest)});
    out.residual = ratio(l2_norm(lhs - gradients - rest), scale);
    out.time_derivative_gap = ratio(l2_norm(time_derivative(wt) - dtwt), l2_norm(dtwt));
    return out;
}

// ------------------------------------------------------------------ stress

StressBundle assemble_stress(const IterationState& s, const Mollified& moll, const Perturbation& pert,
                             const CutoffFamily& cut, const std::vector<double>& rho0) {
    StressBundle b;
    const Lattice& lat = s.v.lattice();
    const double nu = s.nu;
    b.v_next = moll.v + pert.w;
    b.v_next.mean_free = true;
    b.p_tilde = moll.p;

    ProductResult vv = dealiased_product(b.v_next, b.v_next, Contraction::outer);
    ProductResult vw = dealiased_product(moll.v, pert.w, Contraction::outer);
    ProductResult ww = dealiased_product(pert.w, pert.w, Contraction::outer);
    ProductResult pp = dealiased_product(pert.wp, pert.wp, Contraction::outer);
    b.truncation_loss = vv.truncation_loss + vw.truncation_loss + ww.truncation_loss + pp.truncation_loss;

    const FourierField total = nse_lhs(b.v_next, vv.field, moll.p, nu);

    b.linear = time_derivative(pert.wp + pert.wc);
    FourierField visc = laplacian(pert.w);
    visc *= nu;
    b.linear -= visc;
    vw.field *= 2.0;
    b.linear += divergence(vw.field);

    b.corrector = divergence(ww.field - pp.field);
    b.oscillation = divergence(pp.field + moll.R) + time_derivative(pert.wt);
    b.commutator = divergence(moll.commutator);
    b.defect = moll.defect;

    const FourierField sum = b.linear + b.corrector + b.oscillation + b.commutator + b.defect;
    b.piece_sum_residual = ratio(l2_norm(sum - total), l2_norm(total));

    b.resolved = inverse_divergence(leray_project(total));
    b.p_next = moll.p - inverse_laplacian(divergence(total));

    // P = sum rho_i chi_i^2 + |w_p|^2 / 2 (nonzero modes) - D_t Delta^{-1} div Q
    const Lattice& coarse = cut.stress.lattice();
    std::vector<std::vector<double>> rc(coarse.n_time);
    for (int t = 0; t < coarse.n_time; ++t) {
        rc[t].assign(cut.nodes[0][t].size(), 0.0);
        for (int i = 0; i < cut.count; ++i) {
            const double rho = i == 0 ? rho0[t] : cut.rho[i];
            for (std::size_t j = 0; j < rc[t].size(); ++j) rc[t][j] += rho * cut.nodes[i][t][j] * cut.nodes[i][t][j];
        }
    }
    b.pressure_P = resample(from_nodes(rc, coarse), lat.n_space);
    FourierField half_energy = nonzero(trace_of(pp.field));
    half_energy *= 0.5;
    b.pressure_P += half_energy;
    b.pressure_P -= time_derivative(pert.wt_potential);
    return b;
}

// ------------------------------------------------------------------ step

namespace {

RhoInputs rho_inputs(const IterationState& s, const CutoffFamily& cut, const LevelParams& L,
                     const DirectionSet& dirs) {
    RhoInputs rin;
    rin.v_energy = l2_per_time(s.v);
    for (double& e : rin.v_energy) e *= e;
    rin.chi0_sq = cut.chi_sq_integral[0];
    for (int i = 1; i < cut.count; ++i) {
        rin.chi_sq.push_back(cut.chi_sq_integral[i]);
        rin.rho_i.push_back(cut.rho[i]);
    }
    rin.stress_sup_on_chi0 = cut.stress_sup_on_chi0;
    rin.delta_next = L.delta_next;
    rin.delta_next2 = L.delta_next2;
    rin.ell = L.ell;
    rin.eps_gamma = dirs.eps_gamma;
    return rin;
}

nlohmann::json stress_norms(const FourierField& forcing, const NormOptions& norms) {
    const FourierField R = inverse_divergence(leray_project(forcing));
    return {{"L1", l1_norm(R, norms)}, {"L2", l2_norm(R)}};
}

}  // namespace

StepResult step(const IterationState& s, const ParameterSchedule& sched, const EnergyProfile& energy,
                const DirectionSet& dirs, const StepOptions& opt) {
    validate_state(s, 1e-10);
    const Lattice& lat = s.v.lattice();
    if (lat.n_time < 5) throw std::invalid_argument("step: the time derivative needs n_time >= 5");
    std::string stage = "schedule";
    try {
        const LevelParams L = sched.level(s.q);
        const WaveCheck wcheck = check_wave_params(L.waves, dirs);
        nlohmann::json rep;
        rep["q"] = s.q;
        rep["nu"] = s.nu;
        rep["level"] = {{"lambda_q", L.lambda_q},       {"delta_q", L.delta_q},         {"lambda_next", L.lambda_next},
                        {"delta_next", L.delta_next},   {"delta_next2", L.delta_next2}, {"ell", L.ell},
                        {"lambda_sigma", L.waves.lambda_sigma}, {"r", L.waves.r},       {"mu", L.waves.mu},
                        {"overridden", L.overridden}};
        rep["schedule"] = {{"eps_R", sched.eps_R}, {"c0", sched.c0}, {"p", sched.p}};
        rep["wave_check"] = {{"sigma_r", wcheck.sigma_r},
                             {"sigma_r_bound", wcheck.sigma_r_bound},
                             {"sigma_r_ok", wcheck.sigma_r_ok},
                             {"annulus_ok", wcheck.annulus_ok}};
        {
            nlohmann::json audit = nlohmann::json::array();
            for (const AuditItem& a : numeric_audit(L, sched, dirs)) audit.push_back(a.to_json());
            rep["audit"] = audit;
        }

        stage = "mollify_state";
        Mollified moll = mollify_state(s, L.ell, opt.norms);
        rep["mollify"] = {{"commutator_sup", moll.commutator_sup},
                          {"commutator_constant", moll.commutator_constant},
                          // C^N norms are sampled on a finite grid and bound the true norm from below
                          {"cn_norms_are_grid_lower_bounds", true},
                          {"defect_L2", l2_norm(moll.defect)},
                          {"truncation_loss", moll.truncation_loss}};

        stage = "stress_cutoffs";
        const CutoffFamily cut = stress_cutoffs(moll.R, L, sched, opt.amp_modes);
        rep["cutoffs"] = {{"collocation_n", cut.n_amp},
                          {"count", cut.count},
                          {"i_max", cut.i_max},
                          {"i_max_exceeded", cut.i_max_exceeded},
                          {"scale", cut.scale},
                          {"partition_residual", cut.partition_residual},
                          {"disjointness", cut.disjointness},
                          {"rho_i", cut.rho}};
        {
            double chi0_min = std::numeric_limits<double>::infinity();
            for (double v : cut.chi_sq_integral[0]) chi0_min = std::min(chi0_min, v);
            rep["cutoffs"]["chi0_sq_integral_min"] = chi0_min;
        }

        stage = "energy.rho0";
        const RhoInputs rin = rho_inputs(s, cut, L, dirs);
        const RhoTrack rho = rho0(rin, energy, lat);
        rep["rho"] = {{"rho0_max", rho.rho0_max},
                      {"rho0_bound", rho.rho0_bound},
                      {"rho0_bound_ok", rho.rho0_bound_ok},
                      {"rho_modulus_constant", rho.rho_modulus_constant},
                      {"gamma_ratio_max", rho.gamma_ratio_max},
                      {"eps_gamma", dirs.eps_gamma}};

        stage = "amplitudes";
        const AmplitudeSet amps = amplitudes(cut, rho.rho0, dirs, lat);
        rep["amplitudes"] = {{"families_used", amps.families_used},
                             {"wwid_node_residual", amps.wwid_node_residual},
                             {"a_constant", amps.a_constant},
                             {"gamma_ratio_max", amps.gamma_ratio_max}};

        stage = "assemble_perturbation";
        const Perturbation pert = assemble_perturbation(amps, dirs, L.waves, lat);
        const double wp2 = l2_norm(pert.wp), wc2 = l2_norm(pert.wc), wt2 = l2_norm(pert.wt);
        const double r = L.waves.r;
        rep["perturbation"] = {{"wp_L2", wp2},
                               {"wc_L2", wc2},
                               {"wt_L2", wt2},
                               {"corrector_ratio", ratio(wc2 + wt2, wp2)},
                               {"corrector_ratio_scale", std::pow(r, 1.5) / (L.ell * L.waves.mu)},
                               {"curl_form_residual", pert.curl_form_residual},
                               {"div_wp_wc_residual", pert.div_residual},
                               {"div_w_residual", pert.div_w_residual},
                               {"truncation_loss", pert.truncation_loss}};
        if (opt.peanuts && !amps.families_used.empty()) {
            stage = "peanuts_check";
            const PeanutsCheck pc = peanuts_check(amps, dirs, L.waves, lat, pert.wt);
            rep["perturbation"]["peanuts_residual"] = pc.residual;
            rep["perturbation"]["time_derivative_gap"] = pc.time_derivative_gap;
        }

        stage = "assemble_stress";
        StressBundle sb = assemble_stress(s, moll, pert, cut, rho.rho0);
        moll = Mollified{};
        StepResult res;
        res.next.q = s.q + 1;
        res.next.nu = s.nu;
        res.next.v = std::move(sb.v_next);
        res.next.p = std::move(sb.p_next);
        res.next.R = std::move(sb.resolved);

        stage = "report";
        const ResidualResult resid = nsr_residual(res.next.v, res.next.p, res.next.R, res.next.nu);
        const double R0 = l1_norm(s.R, opt.norms), R1 = l1_norm(res.next.R, opt.norms);
        const double dv = l2_norm(res.next.v - s.v);
        rep["stress"] = {{"linear", stress_norms(sb.linear, opt.norms)},
                         {"corrector", stress_norms(sb.corrector, opt.norms)},
                         {"oscillation", stress_norms(sb.oscillation, opt.norms)},
                         {"commutator", stress_norms(sb.commutator, opt.norms)},
                         {"defect", stress_norms(sb.defect, opt.norms)},
                         {"piece_sum_residual", sb.piece_sum_residual},
                         {"truncation_loss", sb.truncation_loss},
                         {"truncation_flag", ratio(sb.truncation_loss, std::pow(l2_norm(res.next.v), 2)) > opt.truncation_threshold},
                         {"pressure_P_L2", l2_norm(sb.pressure_P)}};
        rep["residual"] = {{"relative", resid.relative}, {"absolute", resid.absolute}, {"scale", resid.scale}};
        rep["contraction"] = {{"R_q_L1", R0}, {"R_next_L1", R1}, {"ratio", ratio(R1, R0)}};
        rep["velocity_increment"] = {{"L2", dv}, {"M_measured", ratio(dv, std::sqrt(L.delta_next))}};

        // inductive-estimate surrogates for the new state at level q+1
        const double v_c1 = norm(res.next.v, NormSpec::cn(1), opt.norms);
        const double R_c1 = norm(res.next.R, NormSpec::cn(1), opt.norms);
        const double lam = L.lambda_next;
        rep["inductive"] = {
            {"V_ind", {{"measured", v_c1}, {"bound", std::pow(lam, 4)}, {"ok", v_c1 <= std::pow(lam, 4)}}},
            {"R_ind_L1",
             {{"measured", R1},
              {"bound", std::pow(lam, -sched.eps_R) * L.delta_next2},
              {"ok", R1 <= std::pow(lam, -sched.eps_R) * L.delta_next2}}},
            {"R_ind_C1", {{"measured", R_c1}, {"bound", std::pow(lam, 10)}, {"ok", R_c1 <= std::pow(lam, 10)}}}};

        stage = "energy";
        std::vector<double> e = energy.sample(lat);
        std::vector<double> v1e = l2_per_time(res.next.v);
        for (double& x : v1e) x *= x;
        const GapResult gap = energy_gap(e, v1e, l2_per_time(res.next.R), L.delta_next2, opt.zero_tol);
        const EnergyMatch match = energy_match(e, v1e, rho.rho0, L.delta_next2, opt.inflation);
        const std::vector<double> erho = e_rho_error(pert.wp_energy, rin, rho);
        double erho_sup = 0.0;
        for (double x : erho) erho_sup = std::max(erho_sup, std::abs(x));
        const ZeroCaseResult zc =
            zero_case_check(rho.rho0, l2_per_time(pert.w), l2_per_time(s.R), gap.gap, L.delta_next2, opt.zero_tol);
        rep["energy"] = {{"match_ok", match.ok},
                         {"match_max_ratio", match.max_ratio},
                         {"inflation", match.inflation},
                         {"active_samples", match.active_samples},
                         {"E_rho_sup", erho_sup},
                         {"E_rho_bound", std::sqrt(L.ell)},
                         {"energy_ind_next_ok", gap.energy_ind_ok},
                         {"zero_reynolds_next_ok", gap.zero_reynolds_ok},
                         {"zero_case_ok", zc.ok},
                         {"zero_case_samples", zc.checked_samples}};
        res.report = std::move(rep);
        res.rho = rho;
        res.gap_next = gap.gap;
        return res;
    } catch (const GammaDomainError& e) {
        throw std::runtime_error("[" + stage + "] " + e.what());
    } catch (const GammaDomainViolation& e) {
        std::ostringstream msg;
        msg << "[" << stage << "] " << e.what() << " at node (" << e.node[0] << ',' << e.node[1] << ','
            << e.node[2] << ") t=" << e.t << " i=" << e.i;
        throw std::runtime_error(msg.str());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("[" + stage + "] " + e.what());
    } catch (const std::domain_error& e) {
        throw std::invalid_argument("[" + stage + "] " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error("[" + stage + "] " + e.what());
    }
}

EnergyTrack energy_track(const IterationState& s, const ParameterSchedule& sched, const EnergyProfile& energy,
                         const DirectionSet& dirs, const StepOptions& opt) {
    validate_state(s, 1e-10);
    const Lattice& lat = s.v.lattice();
    std::string stage = "schedule";
    try {
        const LevelParams L = sched.level(s.q);
        stage = "mollify_state";
        const Mollified moll = mollify_state(s, L.ell, opt.norms);
        stage = "stress_cutoffs";
        const CutoffFamily cut = stress_cutoffs(moll.R, L, sched, opt.amp_modes);
        stage = "energy.rho0";
        EnergyTrack out;
        out.rho = rho0(rho_inputs(s, cut, L, dirs), energy, lat);
        const GapResult gap =
            energy_gap(energy.sample(lat), out.rho.v_energy, l2_per_time(s.R), L.delta_next, opt.zero_tol);
        out.gap = gap.gap;
        out.report = {{"q", s.q},
                      {"delta_next", L.delta_next},
                      {"delta_next2", L.delta_next2},
                      {"rho0_max", out.rho.rho0_max},
                      {"rho0_bound", out.rho.rho0_bound},
                      {"rho0_bound_ok", out.rho.rho0_bound_ok},
                      {"gamma_ratio_max", out.rho.gamma_ratio_max},
                      {"eps_gamma", dirs.eps_gamma},
                      {"energy_ind_ok", gap.energy_ind_ok},
                      {"zero_reynolds_ok", gap.zero_reynolds_ok},
                      {"first_failure", gap.first_failure}};
        return out;
    } catch (const GammaDomainError& e) {
        throw std::runtime_error("[" + stage + "] " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("[" + stage + "] " + e.what());
    } catch (const std::domain_error& e) {
        throw std::invalid_argument("[" + stage + "] " + e.what());
    }
}

// ------------------------------------------------------------------ Euler initialization

EulerInitResult euler_init(const FourierField& u, int n, const ParameterSchedule& sched, const NormOptions& norms) {
    if (u.components() != 3) throw std::invalid_argument("euler_init: u must be a vector field");
    const double du = l2_norm(divergence(u)), gu = l2_norm(sym_gradient(u));
    if (du > 1e-10 * std::max(gu, 1e-300)) throw std::invalid_argument("euler_init: u is not divergence-free");
    const LevelParams L = sched.level(n);
    const double lam = L.lambda_q;
    if (!(lam >= 1.0)) throw std::invalid_argument("euler_init: lambda_n must be >= 1");
    const double ell = 1.0 / lam, nu = 1.0 / lam;

    EulerInitResult out;
    IterationState& s = out.state;
    s.q = n;
    s.nu = nu;
    FourierField um = u;
    um -= mean_part(u);  // mean-free by assumption, enforced here

    const ProductResult uu = dealiased_product(um, um, Contraction::outer);
    const FourierField dtu = time_derivative(um);
    const FourierField euler_force = dtu + divergence(uu.field);
    // p_u from the gradient part of the Euler forcing
    const FourierField p_u = -1.0 * inverse_laplacian(divergence(euler_force));
    const double euler_residual = ratio(l2_norm(leray_project(euler_force)), std::max(l2_norm(dtu), l2_norm(divergence(uu.field))));

    s.v = mollify(um, ell, MollifyDomain::both);
    s.v.mean_free = true;
    const ProductResult vv = dealiased_product(s.v, s.v, Contraction::outer);
    const FourierField A = vv.field - mollify(uu.field, ell, MollifyDomain::both);
    FourierField tr = trace_of(A);
    tr *= 1.0 / 3.0;
    s.p = mollify(p_u, ell, MollifyDomain::both) - tr;
    FourierField visc_stress = sym_gradient(s.v);
    visc_stress *= 2.0 * nu;
    const FourierField R_formula = trace_free_part(A) - visc_stress;

    FourierField defect = nse_lhs(s.v, vv.field, s.p, nu);
    defect -= divergence(R_formula);
    const FourierField fix = inverse_divergence(leray_project(defect));
    s.R = R_formula + fix;
    s.R.trace_free = true;
    s.p -= inverse_laplacian(divergence(defect));

    const ResidualResult resid = nsr_residual(s.v, s.p, s.R, s.nu);
    const double M_u = norm(um, NormSpec::cn(1), norms);
    out.report = {{"n", n},
                  {"lambda_n", lam},
                  {"nu", nu},
                  {"ell", ell},
                  {"u_divergence", ratio(du, gu)},
                  {"u_euler_residual", euler_residual},
                  {"M_u", M_u},
                  {"R_L1", l1_norm(s.R, norms)},
                  {"R_C0", norm(s.R, NormSpec::linf(), norms)},
                  {"defect_stress_L1", l1_norm(fix, norms)},
                  {"M_u_over_lambda", M_u / lam},
                  {"truncation_loss", uu.truncation_loss + vv.truncation_loss},
                  {"residual", {{"relative", resid.relative}, {"absolute", resid.absolute}}}};
    return out;
}

}  // namespace nsr
