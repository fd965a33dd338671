#include "nsrlab/identities.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nsrlab/spectral.hpp"
#include "nsrlab/waves.hpp"

namespace nsr {

nlohmann::json IdentityCheck::to_json() const {
    nlohmann::json j = {{"id", id}, {"name", name}, {"measured", measured}, {"tolerance", tolerance},
                        {"verdict", ok ? "pass" : "fail"}};
    if (!detail.empty()) j["detail"] = detail;
    return j;
}

nlohmann::json IdentitySuite::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks) arr.push_back(c.to_json());
    return {{"checks", arr}, {"verdict", all_ok ? "pass" : "fail"}};
}

namespace {

double max_abs(const FourierField& a) {
    double m = 0.0;
    for (const cplx& x : a.raw()) m = std::max(m, std::abs(x));
    return m;
}

IdentityCheck make(const std::string& id, const std::string& name, double measured, double tol) {
    IdentityCheck c;
    c.id = id;
    c.name = name;
    c.measured = measured;
    c.tolerance = tol;
    c.ok = std::isfinite(measured) && measured <= tol;
    return c;
}

Sym3 random_near_identity(std::mt19937_64& rng, double radius) {
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Sym3 e;
    for (double& x : e) x = n(rng);
    const double s = radius * u(rng) / frobenius(e);
    Sym3 R = identity_sym();
    for (int c = 0; c < 6; ++c) R[c] += s * e[c];
    return R;
}

// (xi . grad) f
FourierField transport(const FourierField& f, const Vec3& xi) {
    FourierField out(f.lattice(), 1);
    for (int i = 0; i < 3; ++i) {
        FourierField di = derivative(f, static_cast<Axis>(i), 1);
        di *= xi[i];
        out += di;
    }
    return out;
}

}  // namespace

IdentitySuite verify_identities(const DirectionSet& dirs, const IdentityOptions& opt) {
    IdentitySuite suite;
    auto& out = suite.checks;
    const long long N = dirs.N_Lambda;
    const WaveParams wp{opt.lambda, opt.lambda_sigma, opt.r, opt.mu};
    check_wave_params(wp, dirs);
    const Lattice stat{opt.n_space, 1, 0.0};
    const Lattice lat{opt.n_space, opt.n_time, opt.T};

    // a. Dirichlet kernel normalization
    {
        double worst = 0.0;
        for (int r : opt.dirichlet_r) {
            const double n2 = std::pow(l2_norm(dirichlet_kernel(stat, r)), 2);
            worst = std::max(worst, std::abs(n2 - kTorusVolume) / kTorusVolume);
        }
        out.push_back(make("a", "dirichlet_l2_normalization", worst, 1e-10));
    }

    // b. Beltrami eigenfields: symbolic per direction and on the lattice
    {
        double worst = 0.0;
        for (const auto& fam : dirs.families) {
            worst = std::max(worst, beltrami_eigen_residual(fam, opt.lambda));
            for (int j = 0; j < 6; ++j) {
                const FourierField U = beltrami_pair(stat, fam.dirs[j], opt.lambda);
                FourierField lu = U;
                lu *= static_cast<double>(opt.lambda);
                const double scale = max_abs(lu);
                worst = std::max(worst, max_abs(curl(U) - lu) / scale);
                worst = std::max(worst, max_abs(divergence(U)) / scale);
            }
        }
        out.push_back(make("b", "beltrami_curl_eigen_and_divergence_free", worst, 1e-10));
    }

    // c. (1/mu) d_t eta = +-(xi . grad) eta, + on the positive half, - on the negative half
    {
        double worst = 0.0;
        bool negative_seen = false;
        for (const auto& fam : dirs.families)
            for (const auto& d : fam.dirs) {
                const FourierField e = eta(lat, d, wp, N);
                FourierField lhs = eta_time_derivative(lat, d, wp, N);
                lhs *= 1.0 / opt.mu;
                FourierField rhs = transport(e, d.xi_d());
                if (!d.positive) {
                    rhs *= -1.0;
                    negative_seen = true;
                }
                worst = std::max(worst, max_abs(lhs - rhs) / std::max(max_abs(rhs), 1e-300));
            }
        IdentityCheck c = make("c", "eta_transport_identity", worst, 1e-10);
        if (!negative_seen) {
            c.ok = false;
            c.detail = "no negative direction in the set";
        }
        out.push_back(c);
    }

    // d. geometric decomposition on the certified ball
    {
        std::mt19937_64 rng(opt.seed);
        double worst = 0.0;
        for (int s = 0; s < opt.gamma_samples; ++s) {
            const Sym3 R = random_near_identity(rng, dirs.eps_gamma);
            for (const auto& fam : dirs.families) {
                const auto g = gamma(R, fam);
                Sym3 acc{};
                for (int j = 0; j < 12; ++j) {
                    const Vec3 xi = fam.dirs[j].xi_d();
                    for (int a = 0; a < 3; ++a)
                        for (int b = a; b < 3; ++b)
                            acc[sym_index(a, b)] += 0.5 * g[j] * g[j] * ((a == b ? 1.0 : 0.0) - xi[a] * xi[b]);
                }
                Sym3 diff;
                for (int c = 0; c < 6; ++c) diff[c] = acc[c] - R[c];
                worst = std::max(worst, frobenius(diff) / frobenius(R));
            }
        }
        out.push_back(make("d", "geometric_decomposition", worst, 1e-12));
    }

    // e. mean tensor identity with intermittent waves
    {
        std::mt19937_64 rng(opt.seed + 1);
        const Lattice one{opt.n_space, 1, 0.0};
        double worst = 0.0;
        for (const auto& fam : dirs.families) {
            const Sym3 R = random_near_identity(rng, dirs.eps_gamma);
            worst = std::max(worst, mean_tensor_check(one, fam, wp, N, R) / frobenius(R));
        }
        out.push_back(make("e", "mean_tensor_cancellation", worst, 1e-9));
    }

    // f. frequency supports of single waves and of non-cancelling products
    {
        const double lam = opt.lambda;
        const double c_lambda = dirs.c_Lambda();
        double wave_excess = 0.0, product_excess = 0.0;
        for (const auto& fam : dirs.families) {
            std::vector<SparseVector> waves;
            for (const auto& d : fam.dirs) {
                waves.push_back(intermittent_sparse(d, wp, N, 0.3 * opt.T));
                const auto rad = support_radii(waves.back(), 1e-14);
                wave_excess = std::max({wave_excess, (lam / 2.0 - rad[0]) / lam, (rad[1] - 2.0 * lam) / lam});
            }
            for (const auto& d : fam.dirs)
                for (const auto& e : fam.dirs) {
                    if (e.index == fam.opposite(d).index) continue;
                    const auto rad = support_radii(outer_sparse(waves[d.index], waves[e.index]), 1e-14);
                    product_excess =
                        std::max({product_excess, (c_lambda * lam - rad[0]) / lam, (rad[1] - 4.0 * lam) / lam});
                }
        }
        IdentityCheck c = make("f", "frequency_support", std::max({0.0, wave_excess, product_excess}), 0.0);
        c.detail = "largest relative excursion outside [lambda/2, 2 lambda] and [c_Lambda lambda, 4 lambda]";
        out.push_back(c);
    }

    // g. oscillation identity
    {
        double worst = 0.0;
        for (const auto& fam : dirs.families)
            worst = std::max(worst, oscillation_identity_check(lat, fam.dirs[0], wp, N));
        out.push_back(make("g", "oscillation_identity", worst, 1e-9));
    }

    suite.all_ok = std::all_of(out.begin(), out.end(), [](const IdentityCheck& c) { return c.ok; });
    return suite;
}

}  // namespace nsr
