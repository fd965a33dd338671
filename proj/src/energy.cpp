#include "nsrlab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nsrlab/spectral.hpp"

namespace nsr {

double EnergyProfile::value(double t) const {
    switch (kind) {
        case Kind::constant: return base;
        case Kind::linear: return base + slope * t;
        case Kind::cosine: return base + amplitude * std::cos(frequency * t);
        case Kind::samples: break;
    }
    throw std::logic_error("EnergyProfile::value: sampled profile has no closed form");
}

std::vector<double> EnergyProfile::sample(const Lattice& lat) const {
    if (kind == Kind::samples) {
        if (static_cast<int>(values.size()) != lat.n_time)
            throw std::invalid_argument("energy profile: sample count differs from n_time");
        return values;
    }
    std::vector<double> out(lat.n_time);
    for (int j = 0; j < lat.n_time; ++j) out[j] = value(lat.time(j));
    return out;
}

double EnergyProfile::c1_closed_form(double T) const {
    switch (kind) {
        case Kind::constant: return std::abs(base);
        case Kind::linear: return std::max(std::abs(base), std::abs(base + slope * T)) + std::abs(slope);
        case Kind::cosine: return std::abs(base) + std::abs(amplitude) * (1.0 + std::abs(frequency));
        case Kind::samples: break;
    }
    return -1.0;
}

ProfileCheck check_profile(const EnergyProfile& e, const Lattice& lat) {
    ProfileCheck out;
    const std::vector<double> s = e.sample(lat);
    double sup = 0.0, dsup = 0.0;
    for (double v : s) {
        if (v < 0.0) out.nonnegative = false;
        sup = std::max(sup, std::abs(v));
    }
    for (std::size_t j = 1; j < s.size(); ++j) dsup = std::max(dsup, std::abs(s[j] - s[j - 1]) / lat.dt());
    out.c1_finite_difference = sup + dsup;
    out.c1_declared = e.declared_c1 >= 0.0 ? e.declared_c1 : e.c1_closed_form(lat.T);
    out.c1_ok = out.c1_declared < 0.0 || out.c1_finite_difference <= out.c1_declared * (1.0 + 1e-9) + 1e-12;
    return out;
}

RhoTrack rho0(const RhoInputs& in, const EnergyProfile& profile, const Lattice& lat) {
    const int nt = lat.n_time;
    if (static_cast<int>(in.v_energy.size()) != nt || static_cast<int>(in.chi0_sq.size()) != nt)
        throw std::invalid_argument("rho0: per-sample inputs must have n_time entries");
    if (in.chi_sq.size() != in.rho_i.size()) throw std::invalid_argument("rho0: chi/rho count mismatch");
    RhoTrack out;
    out.e = profile.sample(lat);
    out.v_energy = in.v_energy;
    out.t.resize(nt);
    out.tilde_e.resize(nt);
    out.rho.resize(nt);
    for (int j = 0; j < nt; ++j) {
        out.t[j] = lat.time(j);
        double te = out.e[j] - in.v_energy[j];
        for (std::size_t i = 0; i < in.rho_i.size(); ++i) te -= 3.0 * in.rho_i[i] * in.chi_sq[i][j];
        out.tilde_e[j] = te;
        const double num = std::max(te - in.delta_next2 / 2.0, 0.0);
        out.rho[j] = num > 0.0 ? num / (3.0 * in.chi0_sq[j]) : 0.0;
    }
    out.rho0 = nt > 1 ? mollify_samples(out.rho, lat.dt(), in.ell) : out.rho;
    for (double& r : out.rho0) r = std::max(r, 0.0);  // clears -0 and rounding below zero
    out.rho0_max = *std::max_element(out.rho0.begin(), out.rho0.end());
    out.rho0_bound = 2.0 * in.delta_next;
    out.rho0_bound_ok = out.rho0_max <= out.rho0_bound;

    const double window = std::max(in.ell, lat.dt()) * (1.0 + 1e-12);
    const double scale = std::pow(in.ell, 1.0 / 6.0);
    for (int a = 0; a < nt; ++a)
        for (int b = a + 1; b < nt && out.t[b] - out.t[a] <= window; ++b)
            out.rho_modulus_constant = std::max(out.rho_modulus_constant, std::abs(out.rho[b] - out.rho[a]) / scale);

    if (!in.stress_sup_on_chi0.empty()) {
        for (int j = 0; j < nt; ++j) {
            const double s = in.stress_sup_on_chi0[j];
            if (s == 0.0) continue;
            const double ratio = out.rho0[j] > 0.0 ? s / out.rho0[j] : std::numeric_limits<double>::infinity();
            out.gamma_ratio_max = std::max(out.gamma_ratio_max, ratio);
            if (in.eps_gamma > 0.0 && ratio > in.eps_gamma) {
                std::ostringstream msg;
                msg << "rho0: |R_ell|/rho_0 = " << ratio << " exceeds eps_gamma = " << in.eps_gamma
                    << " on supp chi_0 at t = " << out.t[j];
                throw GammaDomainError(msg.str(), j, ratio);
            }
        }
    }
    return out;
}

GapResult energy_gap(const std::vector<double>& e, const std::vector<double>& v_energy,
                     const std::vector<double>& stress_l2, double delta_next, double zero_tol) {
    if (e.size() != v_energy.size() || e.size() != stress_l2.size())
        throw std::invalid_argument("energy_gap: size mismatch");
    GapResult out;
    out.gap.resize(e.size());
    for (std::size_t j = 0; j < e.size(); ++j) {
        const double g = e[j] - v_energy[j];
        out.gap[j] = g;
        const bool ind = g >= 0.0 && g <= delta_next;
        const bool zr = !(g <= delta_next / 100.0) || stress_l2[j] <= zero_tol;
        if (!ind) out.energy_ind_ok = false;
        if (!zr) out.zero_reynolds_ok = false;
        if ((!ind || !zr) && out.first_failure < 0) out.first_failure = static_cast<int>(j);
    }
    return out;
}

EnergyMatch energy_match(const std::vector<double>& e, const std::vector<double>& v_next_energy,
                         const std::vector<double>& rho0, double delta_next2, double inflation) {
    EnergyMatch out;
    out.inflation = inflation;
    out.deviation.resize(e.size());
    for (std::size_t j = 0; j < e.size(); ++j) {
        out.deviation[j] = std::abs(e[j] - v_next_energy[j] - delta_next2 / 2.0);
        if (rho0[j] == 0.0) continue;
        ++out.active_samples;
        const double ratio = out.deviation[j] / (delta_next2 / 4.0);
        out.max_ratio = std::max(out.max_ratio, ratio);
        if (ratio > inflation) out.ok = false;
    }
    return out;
}

std::vector<double> e_rho_error(const std::vector<double>& wp_energy, const RhoInputs& in, const RhoTrack& rho) {
    std::vector<double> out(wp_energy.size());
    for (std::size_t j = 0; j < wp_energy.size(); ++j) {
        double target = 3.0 * rho.rho0[j] * in.chi0_sq[j];
        for (std::size_t i = 0; i < in.rho_i.size(); ++i) target += 3.0 * in.rho_i[i] * in.chi_sq[i][j];
        out[j] = wp_energy[j] - target;
    }
    return out;
}

ZeroCaseResult zero_case_check(const std::vector<double>& rho0, const std::vector<double>& w_l2,
                               const std::vector<double>& stress_l2, const std::vector<double>& next_gap,
                               double delta_next2, double tol) {
    ZeroCaseResult out;
    for (std::size_t j = 0; j < rho0.size(); ++j) {
        if (rho0[j] != 0.0) continue;
        ++out.checked_samples;
        const bool ok = w_l2[j] <= tol && stress_l2[j] <= tol && next_gap[j] <= 0.75 * delta_next2;
        if (!ok) {
            out.ok = false;
            out.witnesses.push_back(static_cast<int>(j));
        }
    }
    return out;
}

std::string energy_csv(const RhoTrack& rho, const std::vector<double>& gap) {
    std::ostringstream os;
    os.precision(17);
    os << "t,e,v_energy,tilde_e,rho,rho0,gap\n";
    for (std::size_t j = 0; j < rho.t.size(); ++j)
        os << rho.t[j] << ',' << rho.e[j] << ',' << rho.v_energy[j] << ',' << rho.tilde_e[j] << ',' << rho.rho[j]
           << ',' << rho.rho0[j] << ',' << (j < gap.size() ? gap[j] : 0.0) << '\n';
    return os.str();
}

}  // namespace nsr
