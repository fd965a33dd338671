#include "nsrlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "nsrlab/parallel.hpp"
#include "nsrlab/waves.hpp"

namespace nsr {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::string to_string(BlockFamily f) {
    switch (f) {
        case BlockFamily::dirichlet: return "dirichlet";
        case BlockFamily::eta: return "eta";
        case BlockFamily::wave: return "wave";
    }
    return "dirichlet";
}

BlockFamily block_family_from_string(const std::string& s) {
    if (s == "dirichlet") return BlockFamily::dirichlet;
    if (s == "eta") return BlockFamily::eta;
    if (s == "wave") return BlockFamily::wave;
    throw std::invalid_argument("unknown block family '" + s + "' (dirichlet, eta, wave)");
}

nlohmann::json FitReport::to_json() const {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& [x, y] : samples) s.push_back({x, y});
    return {{"family", family},
            {"quantity", quantity},
            {"abscissa", abscissa},
            {"p", p},
            {"exponent_fitted", exponent_fitted},
            {"exponent_predicted", exponent_predicted},
            {"tolerance", tolerance},
            {"residual", residual},
            {"samples", s},
            {"verdict", to_string(verdict)},
            {"note", note}};
}

FitReport fit_power_law(const std::vector<std::pair<double, double>>& samples, double predicted, double tolerance) {
    FitReport rep;
    rep.samples = samples;
    rep.exponent_predicted = predicted;
    rep.tolerance = tolerance;
    const int n = static_cast<int>(samples.size());
    if (n < 4) {
        rep.note = "fewer than 4 samples";
        return rep;
    }
    for (int i = 0; i < n; ++i) {
        if (i > 0 && !(samples[i].first > samples[i - 1].first)) {
            rep.note = "scales not strictly increasing";
            return rep;
        }
        if (!(samples[i].first > 0.0) || !(samples[i].second > 0.0)) {
            rep.note = "non-positive sample";
            return rep;
        }
    }
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = std::log(samples[i].first);
        b(i) = std::log(samples[i].second);
    }
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    rep.exponent_fitted = x(1);
    rep.residual = std::sqrt((A * x - b).squaredNorm() / n);
    rep.verdict = std::abs(rep.exponent_fitted - predicted) <= tolerance ? Verdict::pass : Verdict::fail;
    return rep;
}

namespace {

nlohmann::json hypotheses_json(const std::vector<std::string>& failed) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : failed) j.push_back(s);
    return j;
}

void require_scalar_static(const FourierField& f, const char* where) {
    if (f.components() != 1 || f.lattice().n_time != 1)
        throw std::invalid_argument(std::string(where) + ": expects a scalar field with one time sample");
}

// Small lattices get a finer quadrature grid so that L^p norms of low-mode fields are accurate.
NormOptions quadrature_for(const Lattice& lat, const NormOptions& opt, int min_points = 64) {
    NormOptions o = opt;
    o.oversample = std::max(o.oversample, (min_points + lat.n_space - 1) / lat.n_space);
    return o;
}

double lp_norm_of(const std::vector<const FourierField*>& parts, double p, const NormOptions& opt) {
    if (p == 2.0) {
        double acc = 0.0;
        for (const FourierField* f : parts) {
            const double n = l2_norm_slice(*f, 0);
            acc += n * n;
        }
        return std::sqrt(acc);
    }
    return lp_norms_slice(parts, 0, {p}, opt)[0];
}

// Pointwise magnitude of all j-th order partials, each distinct multi-index weighted by
// the square root of its multiplicity, so p = 2 reduces to sum |k|^{2j} |f_k|^2.
double derivative_tensor_norm(const FourierField& f, int j, double p, const NormOptions& opt) {
    if (j == 0) return lp_norm_of({&f}, p, opt);
    std::vector<FourierField> parts;
    std::vector<double> fact(j + 1, 1.0);
    for (int i = 1; i <= j; ++i) fact[i] = fact[i - 1] * i;
    for (int a1 = 0; a1 <= j; ++a1)
        for (int a2 = 0; a1 + a2 <= j; ++a2) {
            const int a3 = j - a1 - a2;
            FourierField d = f;
            if (a1) d = derivative(d, Axis::x1, a1);
            if (a2) d = derivative(d, Axis::x2, a2);
            if (a3) d = derivative(d, Axis::x3, a3);
            d *= std::sqrt(fact[j] / (fact[a1] * fact[a2] * fact[a3]));
            parts.push_back(std::move(d));
        }
    std::vector<const FourierField*> ptrs;
    for (const auto& d : parts) ptrs.push_back(&d);
    return lp_norm_of(ptrs, p, opt);
}

FourierField shrink_to_bandwidth(const FourierField& f) {
    return resample(f, 2 * std::max(1, bandwidth(f)) + 1);
}

// Largest |k_i| among modes whose index is not a multiple of kappa, relative to the largest coefficient.
bool is_kappa_periodic(const FourierField& g, int kappa) {
    double biggest = 0.0, stray = 0.0;
    for (int c = 0; c < g.components(); ++c) {
        const cplx* s = g.slab(c, 0);
        for_each_mode(g.lattice(), [&](std::size_t idx, int k1, int k2, int k3) {
            const double m = std::abs(s[idx]);
            biggest = std::max(biggest, m);
            if (k1 % kappa || k2 % kappa || k3 % kappa) stray = std::max(stray, m);
        });
    }
    return stray <= 1e-14 * biggest;
}

// Coefficients of F(kappa x) for F given on a small lattice.
FourierField dilate(const FourierField& small, int kappa, const Lattice& lat) {
    FourierField out(lat, small.components());
    const int K = small.lattice().K();
    if (kappa * K > lat.K()) throw std::invalid_argument("dilate: target lattice too small");
    for (int c = 0; c < small.components(); ++c)
        for (int k1 = -K; k1 <= K; ++k1)
            for (int k2 = -K; k2 <= K; ++k2)
                for (int k3 = 0; k3 <= K; ++k3)
                    out.set_mode(c, 0, kappa * k1, kappa * k2, kappa * k3, small.mode(c, 0, k1, k2, k3));
    return out;
}

struct Rng {
    explicit Rng(std::uint64_t seed, std::uint64_t stream) : gen(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1))) {}
    double normal() { return nd(gen); }
    double uniform() { return ud(gen); }
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen); }
    cplx cnormal() { return {normal(), normal()}; }
    std::mt19937_64 gen;
    std::normal_distribution<double> nd{0.0, 1.0};
    std::uniform_real_distribution<double> ud{0.0, 1.0};
};

// Random real trigonometric polynomial with modes 0 < |k| <= radius (and radius_lo <= |k|).
FourierField random_shell(const Lattice& lat, double radius_lo, double radius, Rng& rng) {
    FourierField f(lat, 1);
    const int R = static_cast<int>(std::floor(radius + 1e-9));
    for (int k1 = -R; k1 <= R; ++k1)
        for (int k2 = -R; k2 <= R; ++k2)
            for (int k3 = 0; k3 <= R; ++k3) {
                const double ks = double(k1 * k1 + k2 * k2 + k3 * k3);
                if (ks == 0.0 || ks > radius * radius + 1e-9 || ks < radius_lo * radius_lo - 1e-9) continue;
                if (k3 == 0 && (k1 < 0 || (k1 == 0 && k2 < 0))) continue;  // partner already set
                f.set_mode(0, 0, k1, k2, k3, rng.cnormal());
            }
    return f;
}

}  // namespace

// ---------------------------------------------------------------- decorrelation

nlohmann::json DecorrelationResult::to_json() const {
    return {{"verdict", to_string(verdict)}, {"failed_hypotheses", hypotheses_json(failed_hypotheses)},
            {"kappa", kappa},           {"lambda", lambda},
            {"M", M},                   {"p", p},
            {"C_f", C_f},               {"measured", ratio},
            {"bound", bound},           {"slack", margin},
            {"normalized_ratio", normalized_ratio}};
}

int decorrelation_min_kappa(double lambda) {
    return static_cast<int>(std::ceil(6.0 * kPi * std::sqrt(3.0) * lambda - 1e-12));
}

int decorrelation_min_M(double lambda, int kappa) {
    const double q = 2.0 * kPi * std::sqrt(3.0) * lambda / kappa;
    if (!(q < 1.0)) return -1;
    const double need = 4.0 * std::log(std::max(lambda, 1.0)) / -std::log(q);
    return std::max(0, static_cast<int>(std::ceil(need - 1e-12)));
}

DecorrelationResult decorrelation_test(const FourierField& f, const FourierField& g, int kappa, double lambda,
                                       int M, double p, const NormOptions& opt) {
    require_scalar_static(f, "decorrelation_test");
    require_scalar_static(g, "decorrelation_test");
    require_same_lattice(f, g, "decorrelation_test");
    DecorrelationResult r;
    r.kappa = kappa;
    r.lambda = lambda;
    r.M = M;
    r.p = p;
    r.bound = 1.0 + 2.0 * kTorusVolume;
    const double q = 2.0 * kPi * std::sqrt(3.0) * lambda / kappa;
    if (!(p == 1.0 || p == 2.0)) r.failed_hypotheses.push_back("p in {1, 2}");
    if (!(q <= 1.0 / 3.0)) r.failed_hypotheses.push_back("2 pi sqrt(3) lambda / kappa <= 1/3");
    if (!(std::pow(lambda, 4) * std::pow(q, M) <= 1.0)) r.failed_hypotheses.push_back("lambda^4 q^M <= 1");
    if (!is_kappa_periodic(g, kappa)) r.failed_hypotheses.push_back("g is (T/kappa)-periodic");
    const ProductResult fg = dealiased_product(f, g, Contraction::scalar);
    if (fg.truncation_loss > 1e-20) r.failed_hypotheses.push_back("lattice resolves f g");

    const FourierField fs = shrink_to_bandwidth(f);
    const NormOptions fine = quadrature_for(fs.lattice(), opt);
    for (int j = 0; j <= M + 4; ++j)
        r.C_f = std::max(r.C_f, derivative_tensor_norm(fs, j, p, fine) / std::pow(lambda, j));
    const double g_norm = lp_norm_of({&g}, p, opt);
    const double fg_norm = lp_norm_of({&fg.field}, p, opt);
    const double f_norm = derivative_tensor_norm(fs, 0, p, fine);
    if (!(g_norm > 0.0) || !(r.C_f > 0.0)) r.failed_hypotheses.push_back("f and g nonzero");
    if (!r.failed_hypotheses.empty()) return r;
    r.ratio = fg_norm / (r.C_f * g_norm);
    r.normalized_ratio = fg_norm * std::pow(kTorusVolume, 1.0 / p) / (f_norm * g_norm);
    r.margin = r.bound / r.ratio;
    r.verdict = r.ratio <= r.bound ? Verdict::pass : Verdict::fail;
    return r;
}

nlohmann::json DecorrelationCorpus::to_json() const {
    nlohmann::json e = nlohmann::json::array();
    for (const auto& x : entries) e.push_back(x.to_json());
    return {{"anchor", "decorrelation_bound"},
            {"evaluated", evaluated},
            {"inconclusive", inconclusive},
            {"measured", worst_ratio},
            {"worst_adversarial", worst_adversarial_ratio},
            {"bound", bound},
            {"slack", worst_ratio > 0.0 ? bound / worst_ratio : 0.0},
            {"verdict", to_string(verdict)},
            {"entries", e}};
}

DecorrelationCorpus decorrelation_corpus(const CorpusOptions& opt) {
    const int n = std::max(1, opt.size);
    // the last quarter searches over f with all energy on |k| = lambda
    const int adversarial_from = n - n / 4;
    DecorrelationCorpus out;
    out.entries.resize(n);
    parallel_for(n, [&](int i) {
        Rng rng(opt.seed, static_cast<std::uint64_t>(i));
        if (i == 0) {
            // squared Dirichlet profile at frequency spacing kappa = lambda sigma N_Lambda = 7 * 5
            const double lambda = 1.0;
            const int kappa = 35;
            const Lattice lat{2 * (2 * kappa + 1) + 1, 1, 0.0};
            const Lattice small{5, 1, 0.0};
            FourierField D = dirichlet_kernel(small, 1);
            FourierField D2 = dealiased_product(D, D, Contraction::scalar).field;
            const double s1 = 2 * kPi * rng.uniform(), s2 = 2 * kPi * rng.uniform(), s3 = 2 * kPi * rng.uniform();
            for (int k1 = -2; k1 <= 2; ++k1)
                for (int k2 = -2; k2 <= 2; ++k2)
                    for (int k3 = 0; k3 <= 2; ++k3)
                        D2.set_mode(0, 0, k1, k2, k3,
                                    D2.mode(0, 0, k1, k2, k3) * std::polar(1.0, k1 * s1 + k2 * s2 + k3 * s3));
            const FourierField g = dilate(D2, kappa, lat);
            FourierField f = resample(random_shell(Lattice{3, 1, 0.0}, 0.0, lambda, rng), lat.n_space);
            f.set_mode(0, 0, 0, 0, 0, 2.0 + rng.uniform());
            out.entries[i] = decorrelation_test(f, g, kappa, lambda, decorrelation_min_M(lambda, kappa), 1.0);
            return;
        }
        const bool adversarial = i >= adversarial_from;
        const double lambda = (!adversarial && i % 4 == 3) ? std::sqrt(2.0) : 1.0;
        const double p = i % 2 == 0 ? 1.0 : 2.0;
        const int kappa = decorrelation_min_kappa(lambda) + (adversarial ? 0 : (i / 4) % 3);
        const int M = decorrelation_min_M(lambda, kappa);
        const int fb = static_cast<int>(std::floor(lambda + 1e-9));
        const Lattice lat{2 * (kappa + fb) + 1, 1, 0.0};
        FourierField f = resample(random_shell(Lattice{2 * fb + 1, 1, 0.0}, adversarial ? lambda : 0.0, lambda, rng),
                                  lat.n_space);
        if (!adversarial) f.set_mode(0, 0, 0, 0, 0, rng.normal() * 2.0);
        Lattice unit{3, 1, 0.0};
        FourierField G(unit, 1);
        if (i % 3 == 0) {
            int m[3];
            do {
                for (int& x : m) x = rng.pick(3) - 1;
            } while (m[0] == 0 && m[1] == 0 && m[2] == 0);
            G.set_mode(0, 0, m[0], m[1], m[2], rng.cnormal());
        } else {
            G = random_shell(unit, 0.0, std::sqrt(3.0), rng);
            G.set_mode(0, 0, 0, 0, 0, rng.normal());
        }
        const FourierField g = dilate(G, kappa, lat);
        out.entries[i] = decorrelation_test(f, g, kappa, lambda, M, p);
    });
    out.bound = 1.0 + 2.0 * kTorusVolume;
    bool any_fail = false;
    for (int i = 0; i < n; ++i) {
        const auto& e = out.entries[i];
        if (e.verdict == Verdict::inconclusive) {
            ++out.inconclusive;
            continue;
        }
        ++out.evaluated;
        any_fail = any_fail || e.verdict == Verdict::fail;
        out.worst_ratio = std::max(out.worst_ratio, e.ratio);
        if (i >= adversarial_from) out.worst_adversarial_ratio = std::max(out.worst_adversarial_ratio, e.ratio);
    }
    out.verdict = out.evaluated == 0 ? Verdict::inconclusive : (any_fail ? Verdict::fail : Verdict::pass);
    return out;
}

// ---------------------------------------------------------------- commutator

FourierField inverse_gradient_magnitude(const FourierField& f) {
    FourierField out = f;
    const Lattice& lat = f.lattice();
    for (int c = 0; c < f.components(); ++c)
        for (int t = 0; t < lat.n_time; ++t) {
            cplx* s = out.slab(c, t);
            for_each_mode(lat, [&](std::size_t idx, int k1, int k2, int k3) {
                const double ks = double(k1 * k1 + k2 * k2 + k3 * k3);
                s[idx] = ks == 0.0 ? cplx(0.0) : s[idx] / std::sqrt(ks);
            });
        }
    out.mean_free = true;
    return out;
}

nlohmann::json CommutatorResult::to_json() const {
    return {{"verdict", to_string(verdict)},
            {"failed_hypotheses", hypotheses_json(failed_hypotheses)},
            {"kappa", kappa},
            {"lambda", lambda},
            {"L", L},
            {"p", p},
            {"C_a", C_a},
            {"mean_removed", mean_removed},
            {"measured_norm", measured},
            {"f_norm", f_norm},
            {"high_norm", high_norm},
            {"bound_factor", bound_factor},
            {"measured", ratio},
            {"bound", ceiling},
            {"slack", ratio > 0.0 ? ceiling / ratio : 0.0}};
}

CommutatorResult commutator_test(const FourierField& a, const FourierField& f, int kappa, double lambda, int L,
                                 double p, double ceiling, const NormOptions& opt) {
    require_scalar_static(a, "commutator_test");
    require_scalar_static(f, "commutator_test");
    require_same_lattice(a, f, "commutator_test");
    CommutatorResult r;
    r.kappa = kappa;
    r.lambda = lambda;
    r.L = L;
    r.p = p;
    r.ceiling = ceiling;
    if (!(p > 1.0 && p <= 2.0)) r.failed_hypotheses.push_back("p in (1, 2]");
    if (kappa < 1) r.failed_hypotheses.push_back("kappa >= 1");
    if (!(lambda >= 1.0)) r.failed_hypotheses.push_back("lambda >= 1");
    if (L < 1) r.failed_hypotheses.push_back("L >= 1");
    const FourierField high = freq_project(f, Band::at_least(kappa));
    ProductResult prod = dealiased_product(a, high, Contraction::scalar);
    if (prod.truncation_loss > 1e-20) r.failed_hypotheses.push_back("lattice resolves a P f");
    if (!r.failed_hypotheses.empty()) return r;

    r.mean_removed = std::abs(prod.field.mode(0, 0, 0, 0, 0));
    prod.field.set_mode(0, 0, 0, 0, 0, 0.0);
    const FourierField as = shrink_to_bandwidth(a);
    const NormOptions fine = quadrature_for(as.lattice(), opt);
    const double inf = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= L; ++j)
        r.C_a = std::max(r.C_a, derivative_tensor_norm(as, j, inf, fine) / std::pow(lambda, j));
    const FourierField lifted = inverse_gradient_magnitude(prod.field);
    r.measured = lp_norm_of({&lifted}, p, opt);
    r.f_norm = lp_norm_of({&f}, p, opt);
    r.high_norm = lp_norm_of({&high}, p, opt);
    r.bound_factor = 1.0 + std::pow(lambda, L) * std::pow(double(kappa), 2.0 - L);
    if (!(r.f_norm > 0.0) || !(r.C_a > 0.0)) {
        r.failed_hypotheses.push_back("a and f nonzero");
        return r;
    }
    r.ratio = r.measured * kappa / (r.C_a * r.bound_factor * r.f_norm);
    r.verdict = r.ratio <= ceiling ? Verdict::pass : Verdict::fail;
    return r;
}

nlohmann::json CommutatorStudy::to_json() const {
    nlohmann::json c = nlohmann::json::array(), s = nlohmann::json::array();
    for (const auto& x : corpus) c.push_back(x.to_json());
    for (const auto& x : sweep) s.push_back(x.to_json());
    return {{"anchor", "commutator_bound"},
            {"measured", worst_ratio},
            {"bound", ceiling},
            {"slack", worst_ratio > 0.0 ? ceiling / worst_ratio : 0.0},
            {"verdict", to_string(corpus_verdict)},
            {"corpus", c},
            {"sweep", s},
            {"kappa_slope", kappa_slope.to_json()},
            {"kappa_slope_relative", kappa_slope_relative.to_json()}};
}

CommutatorStudy commutator_study(const CommutatorStudyOptions& opt) {
    CommutatorStudy out;
    out.ceiling = opt.ceiling;
    const double lambda = 2.0;
    const int L = 3;
    const int n = std::max(1, opt.corpus_size);
    out.corpus.resize(n);
    parallel_for(n, [&](int i) {
        Rng rng(opt.seed, 1000 + static_cast<std::uint64_t>(i));
        const int kappa = i % 2 == 0 ? 4 : 8;
        const double p = (i / 2) % 2 == 0 ? 1.5 : 2.0;
        const Lattice lat{2 * (2 * kappa + 2) + 1, 1, 0.0};
        FourierField a(lat, 1);
        if (i > 1) {
            a = resample(random_shell(Lattice{5, 1, 0.0}, 0.0, lambda, rng), lat.n_space);
            a *= 0.3 / std::max(1e-300, l2_norm_slice(a, 0) / std::sqrt(kTorusVolume));
        }
        a.set_mode(0, 0, 0, 0, 0, 1.0);
        // white spectrum on |k_i| <= 2 kappa
        FourierField f(lat, 1);
        const int B = 2 * kappa;
        for (int k1 = -B; k1 <= B; ++k1)
            for (int k2 = -B; k2 <= B; ++k2)
                for (int k3 = 0; k3 <= B; ++k3) {
                    if (k3 == 0 && (k1 < 0 || (k1 == 0 && k2 <= 0))) continue;
                    f.set_mode(0, 0, k1, k2, k3, rng.cnormal());
                }
        out.corpus[i] = commutator_test(a, f, kappa, lambda, L, p, opt.ceiling);
    });
    bool any_fail = false;
    int evaluated = 0;
    for (const auto& c : out.corpus) {
        if (c.verdict == Verdict::inconclusive) continue;
        ++evaluated;
        any_fail = any_fail || c.verdict == Verdict::fail;
        out.worst_ratio = std::max(out.worst_ratio, c.ratio);
    }
    out.corpus_verdict = evaluated == 0 ? Verdict::inconclusive : (any_fail ? Verdict::fail : Verdict::pass);

    // kappa sweep: one a, one f made of equal-energy thin shells at each kappa
    Rng rng(opt.seed, 999);
    const int kmax = *std::max_element(opt.kappas.begin(), opt.kappas.end());
    const Lattice lat{2 * (kmax + 2 + static_cast<int>(lambda)) + 1, 1, 0.0};
    FourierField a = resample(random_shell(Lattice{5, 1, 0.0}, 0.0, lambda, rng), lat.n_space);
    a *= 0.3 / std::max(1e-300, l2_norm_slice(a, 0) / std::sqrt(kTorusVolume));
    a.set_mode(0, 0, 0, 0, 0, 1.0);
    FourierField f(lat, 1);
    for (int kappa : opt.kappas) {
        FourierField shell = random_shell(lat, kappa, kappa + 2.0 - 1e-6, rng);
        shell *= 1.0 / l2_norm_slice(shell, 0);
        f += shell;
    }
    std::vector<int> kappas = opt.kappas;
    std::sort(kappas.begin(), kappas.end());
    out.sweep.resize(kappas.size());
    parallel_for(static_cast<int>(kappas.size()),
                 [&](int i) { out.sweep[i] = commutator_test(a, f, kappas[i], lambda, L, 2.0, opt.ceiling); });
    std::vector<std::pair<double, double>> raw, rel;
    for (const auto& s : out.sweep) {
        raw.emplace_back(s.kappa, s.measured);
        rel.emplace_back(s.kappa, s.high_norm > 0.0 ? s.measured / s.high_norm : 0.0);
    }
    out.kappa_slope = fit_power_law(raw, -1.0, opt.slope_tolerance);
    out.kappa_slope.family = "commutator";
    out.kappa_slope.quantity = "inverse_gradient_norm";
    out.kappa_slope.abscissa = "kappa";
    out.kappa_slope_relative = fit_power_law(rel, -1.0, opt.slope_tolerance);
    out.kappa_slope_relative.family = "commutator";
    out.kappa_slope_relative.quantity = "inverse_gradient_norm_over_high_part";
    out.kappa_slope_relative.abscissa = "kappa";
    return out;
}

// ---------------------------------------------------------------- scaling laws

namespace {

struct Measured {
    std::vector<double> value, gradient, time_derivative;
};

std::vector<double> gradient_norms(const FourierField& f, const std::vector<double>& ps, const NormOptions& opt) {
    std::vector<FourierField> d;
    for (Axis a : {Axis::x1, Axis::x2, Axis::x3}) d.push_back(derivative(f, a, 1));
    std::vector<const FourierField*> ptrs;
    for (const auto& x : d) ptrs.push_back(&x);
    return lp_norms_slice(ptrs, 0, ps, opt);
}

FitReport labelled(FitReport f, BlockFamily fam, const std::string& quantity, const std::string& abscissa, double p) {
    f.family = to_string(fam);
    f.quantity = quantity;
    f.abscissa = abscissa;
    f.p = p;
    return f;
}

}  // namespace

std::vector<FitReport> scaling_study(BlockFamily family, const DirectionSet& dirs, const ScalingOptions& opt) {
    const std::vector<double>& ps = opt.p_list;
    const Direction& d = dirs.families.at(0).dirs.at(0);
    const long long N = dirs.N_Lambda;
    std::vector<FitReport> out;
    auto fits = [&](const std::vector<int>& scales, const std::vector<std::vector<double>>& values,
                    const std::string& quantity, const std::string& abscissa, double order, bool r_dependent,
                    double tol) {
        for (std::size_t k = 0; k < ps.size(); ++k) {
            std::vector<std::pair<double, double>> s;
            for (std::size_t i = 0; i < scales.size(); ++i) s.emplace_back(scales[i], values[i][k]);
            const double base = r_dependent ? 1.5 - 3.0 / ps[k] : 0.0;
            out.push_back(labelled(fit_power_law(s, base + order, tol), family, quantity, abscissa, ps[k]));
        }
    };
    auto lattice_for = [&](int bw) { return Lattice{2 * bw + 1, 1, 0.0}; };
    auto opts_for = [&](const Lattice& lat) {
        NormOptions o;
        o.oversample = opt.oversample;
        return quadrature_for(lat, o);
    };

    if (family == BlockFamily::dirichlet) {
        std::vector<std::vector<double>> v;
        for (int r : opt.r_list) {
            const Lattice lat = lattice_for(r);
            const FourierField D = dirichlet_kernel(lat, r);
            v.push_back(lp_norms_slice({&D}, 0, ps, opts_for(lat)));
        }
        fits(opt.r_list, v, "value", "r", 0.0, true, opt.slope_tolerance);
        return out;
    }

    if (family == BlockFamily::eta) {
        std::vector<std::vector<double>> v, g, t;
        for (int r : opt.r_list) {
            const WaveParams w{static_cast<int>(N), 1, r, 1.0};
            const Lattice lat = lattice_for(eta_bandwidth(d, w, N));
            const NormOptions o = opts_for(lat);
            {
                const FourierField e = eta(lat, d, w, N);
                v.push_back(lp_norms_slice({&e}, 0, ps, o));
                g.push_back(gradient_norms(e, ps, o));
            }
            const FourierField et = eta_time_derivative(lat, d, w, N);
            t.push_back(lp_norms_slice({&et}, 0, ps, o));
        }
        fits(opt.r_list, v, "value", "r", 0.0, true, opt.slope_tolerance);
        fits(opt.r_list, g, "gradient", "r", 1.0, true, opt.derivative_tolerance);
        fits(opt.r_list, t, "time_derivative", "r", 1.0, true, opt.derivative_tolerance);
        std::vector<std::vector<double>> gs, tm;
        const int r0 = opt.r_list.front();
        for (int ls : opt.lambda_sigma_list) {
            const WaveParams w{static_cast<int>(N) * ls, ls, r0, 1.0};
            const Lattice lat = lattice_for(eta_bandwidth(d, w, N));
            gs.push_back(gradient_norms(eta(lat, d, w, N), ps, opts_for(lat)));
        }
        fits(opt.lambda_sigma_list, gs, "gradient", "lambda_sigma", 1.0, false, opt.derivative_tolerance);
        {
            const WaveParams w0{static_cast<int>(N), 1, r0, 1.0};
            const Lattice lat = lattice_for(eta_bandwidth(d, w0, N));
            for (double mu : opt.mu_list) {
                const WaveParams w{static_cast<int>(N), 1, r0, mu};
                const FourierField et = eta_time_derivative(lat, d, w, N);
                tm.push_back(lp_norms_slice({&et}, 0, ps, opts_for(lat)));
            }
        }
        // mu is real; fit on the real scale
        for (std::size_t k = 0; k < ps.size(); ++k) {
            std::vector<std::pair<double, double>> s;
            for (std::size_t i = 0; i < opt.mu_list.size(); ++i) s.emplace_back(opt.mu_list[i], tm[i][k]);
            out.push_back(labelled(fit_power_law(s, 1.0, opt.derivative_tolerance), family, "time_derivative", "mu",
                                   ps[k]));
        }
        return out;
    }

    // intermittent wave pair
    std::vector<std::vector<double>> v, g;
    for (int r : opt.r_list) {
        const WaveParams w{static_cast<int>(N), 1, r, 1.0};
        const Lattice lat = lattice_for(wave_bandwidth(d, w, N));
        const FourierField P = intermittent_pair(lat, d, w, N);
        v.push_back(lp_norms_slice({&P}, 0, ps, opts_for(lat)));
    }
    fits(opt.r_list, v, "value", "r", 0.0, true, opt.slope_tolerance);
    for (int lambda : opt.lambda_list) {
        const WaveParams w{lambda, 1, 1, 1.0};
        const Lattice lat = lattice_for(wave_bandwidth(d, w, N));
        const FourierField P = intermittent_pair(lat, d, w, N);
        std::vector<FourierField> parts;
        for (Axis a : {Axis::x1, Axis::x2, Axis::x3}) parts.push_back(derivative(P, a, 1));
        std::vector<const FourierField*> ptrs;
        for (const auto& x : parts) ptrs.push_back(&x);
        g.push_back(lp_norms_slice(ptrs, 0, ps, opts_for(lat)));
    }
    fits(opt.lambda_list, g, "gradient", "lambda", 1.0, false, opt.derivative_tolerance);
    return out;
}

}  // namespace nsr
