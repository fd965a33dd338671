#pragma once
// Prescribed energy profiles, the amplitude functions rho / rho_0 and the
// energy-gap predicates evaluated on the lattice time samples.

#include <stdexcept>
#include <string>
#include <vector>

#include "nsrlab/field.hpp"

namespace nsr {

struct EnergyProfile {
    enum class Kind { constant, linear, cosine, samples };
    Kind kind = Kind::constant;
    double base = 0.0;       // e(0) for constant/linear, mean level for cosine
    double slope = 0.0;      // linear
    double amplitude = 0.0;  // cosine: base + amplitude cos(frequency t)
    double frequency = 0.0;
    std::vector<double> values;  // samples kind, one per time sample
    double declared_c1 = -1.0;   // M_e as supplied; negative means "use the closed form"

    double value(double t) const;  // closed forms only
    std::vector<double> sample(const Lattice& lat) const;
    // Upper bound on sup|e| + sup|e'| over [0, T] for the closed forms.
    double c1_closed_form(double T) const;
};

struct ProfileCheck {
    bool nonnegative = true;
    double c1_finite_difference = 0.0;
    double c1_declared = 0.0;
    bool c1_ok = true;  // finite-difference bound <= declared (1e-9 slack)
};
ProfileCheck check_profile(const EnergyProfile& e, const Lattice& lat);

class GammaDomainError : public std::runtime_error {
public:
    GammaDomainError(const std::string& what, int time_index, double ratio)
        : std::runtime_error(what), time_index(time_index), ratio(ratio) {}
    int time_index;
    double ratio;
};

struct RhoInputs {
    std::vector<double> v_energy;               // int |v_q|^2 per sample
    std::vector<double> chi0_sq;                // int chi_0^2 per sample
    std::vector<std::vector<double>> chi_sq;    // [i-1][t] for i >= 1
    std::vector<double> rho_i;                  // [i-1] constants for i >= 1
    std::vector<double> stress_sup_on_chi0;     // sup |R_ell| over supp chi_0, per sample
    double delta_next = 0.0;                    // delta_{q+1}
    double delta_next2 = 0.0;                   // delta_{q+2}
    double ell = 0.0;
    double eps_gamma = 0.0;                     // <= 0 skips the domain check
};

struct RhoTrack {
    std::vector<double> t, e, v_energy, tilde_e, rho, rho0;
    double rho0_max = 0.0;
    double rho0_bound = 0.0;  // 2 delta_{q+1}
    bool rho0_bound_ok = true;
    // max |rho(t) - rho(t')| / ell^{1/6} over sample pairs with |t - t'| <= max(ell, dt)
    double rho_modulus_constant = 0.0;
    double gamma_ratio_max = 0.0;  // sup |R_ell| / rho_0 on supp chi_0
};

// Throws GammaDomainError when |R_ell| / rho_0 exceeds eps_gamma on supp chi_0.
RhoTrack rho0(const RhoInputs& in, const EnergyProfile& profile, const Lattice& lat);

struct GapResult {
    std::vector<double> gap;         // e(t) - int |v|^2
    bool energy_ind_ok = true;       // 0 <= gap <= delta_{q+1}
    bool zero_reynolds_ok = true;    // gap <= delta_{q+1}/100 implies R(t) = 0
    int first_failure = -1;
};
// stress_l2: ||R(t)||_2 per sample; zero_tol decides "R(t) = 0".
GapResult energy_gap(const std::vector<double>& e, const std::vector<double>& v_energy,
                     const std::vector<double>& stress_l2, double delta_next, double zero_tol);

struct EnergyMatch {
    std::vector<double> deviation;  // |e - int |v_{q+1}|^2 - delta_{q+2}/2|
    double max_ratio = 0.0;         // deviation / (delta_{q+2}/4), over samples with rho_0 != 0
    double inflation = 4.0;
    bool ok = true;
    int active_samples = 0;
};
EnergyMatch energy_match(const std::vector<double>& e, const std::vector<double>& v_next_energy,
                         const std::vector<double>& rho0, double delta_next2, double inflation);

// int |w_p|^2 - 3 sum_i rho_i int chi_i^2 per sample (rho_0 time-dependent).
std::vector<double> e_rho_error(const std::vector<double>& wp_energy, const RhoInputs& in,
                                const RhoTrack& rho);

struct ZeroCaseResult {
    bool ok = true;
    int checked_samples = 0;
    std::vector<int> witnesses;  // samples that violate
};
// At samples with rho_0 = 0: w = 0, R_q = 0 within tol and e - int |v_{q+1}|^2 <= 3 delta_{q+2}/4.
ZeroCaseResult zero_case_check(const std::vector<double>& rho0, const std::vector<double>& w_l2,
                               const std::vector<double>& stress_l2, const std::vector<double>& next_gap,
                               double delta_next2, double tol);

// t, e, int|v|^2, tilde_e, rho, rho_0, gap
std::string energy_csv(const RhoTrack& rho, const std::vector<double>& gap);

}  // namespace nsr
