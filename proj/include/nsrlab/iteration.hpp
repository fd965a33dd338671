#pragma once
// One convex-integration step on a lattice: mollify, cut off, build amplitudes,
// assemble the perturbation and resolve the new Reynolds stress. Plus the
// initialization of a state from an Euler flow.

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

#include "nsrlab/energy.hpp"
#include "nsrlab/field.hpp"
#include "nsrlab/geometry.hpp"
#include "nsrlab/spectral.hpp"
#include "nsrlab/waves.hpp"

namespace nsr {

// Explicit numbers for one level, used instead of the super-exponential formulas.
struct DeskLevel {
    double lambda_q = 0.0;
    double delta_q = 0.0;
    int lambda_next = 0;
    double delta_next = 0.0;
    double delta_next2 = 0.0;
    double ell = 0.0;
    double sigma = 0.0;  // lambda_next * sigma must be an integer
    int r = 1;
    double mu = 1.0;
};

struct LevelParams {
    double lambda_q = 0.0, delta_q = 0.0, lambda_next = 0.0, delta_next = 0.0, delta_next2 = 0.0, ell = 0.0;
    WaveParams waves;
    bool overridden = false;
};

struct ParameterSchedule {
    long long a = 5;
    long long b = 512;
    Rational beta = Rational(1, 65536);
    double eps_R = 0.01;
    int c0 = 6;  // 400 / 4^c0 < eps_gamma keeps Id - R/rho_i in the gamma domain
    double p = 16.0 / 15.0;
    std::vector<DeskLevel> desk;  // desk[q] overrides level q

    // lambda_q = a^(b^q), delta_q = lambda_1^{3 beta} lambda_q^{-2 beta}, ell = lambda_q^{-20},
    // r = lambda_{q+1}^{3/4}, sigma = lambda_{q+1}^{-15/16}, mu = lambda_{q+1}^{5/4}.
    // Throws std::domain_error when those numbers are not representable and no override exists.
    LevelParams level(int q) const;
};

struct IterationState {
    int q = 0;
    FourierField v;  // 3 components
    FourierField p;  // scalar
    FourierField R;  // trace-free symmetric
    double nu = 1.0;
};

IterationState zero_state(const Lattice& lat, double nu);

// Initial triple from a time-modulated ABC flow and a prescribed stress.
// v = velocity_amplitude (1 + modulation sin(omega t)) ABC(x); the stress is
// stress_amplitude S(x) with S symmetric, trace-free and divergence-free, plus the
// inverse divergence of the divergence-free part of the flow's own residual, so the
// triple solves the Navier-Stokes-Reynolds system exactly.
struct InitialData {
    double velocity_amplitude = 0.0;
    double modulation = 0.0;
    double omega = 0.0;
    double stress_amplitude = 0.0;
};
IterationState prescribed_state(const Lattice& lat, double nu, const InitialData& d);
// The normalized stress S used above (sup of its Frobenius norm is 1 on the grid).
FourierField prescribed_stress(const Lattice& lat);
// max over t of ||div v|| / ||grad v|| and |mean v|; throws std::invalid_argument above tol.
void validate_state(const IterationState& s, double tol = 1e-10);

// ---- stages

struct Mollified {
    FourierField v, R, p;
    FourierField commutator;  // trace-free part of v_ell (x) v_ell - (v (x) v)_ell
    FourierField defect;      // LHS(v_ell, p_ell) - div(R_ell + commutator)
    double commutator_sup = 0.0;
    double commutator_constant = 0.0;  // commutator_sup / (ell ||v||_C1 ||v||_inf)
    double truncation_loss = 0.0;
};
Mollified mollify_state(const IterationState& s, double ell, const NormOptions& norms = {});

// Smooth step theta(s) = f(s) / (f(s) + f(1 - s)), f(s) = exp(-1/s) for s > 0.
double smooth_step(double s);
// Squared cutoffs at y = <A>: chi_0^2 = 1 - S(u), chi_i^2 = S(u - i + 1) - S(u - i),
// u = log_4 y, S(u) = smooth_step(2u - 1).
double cutoff_squared(int i, double y);

struct CutoffFamily {
    int n_amp = 0;                      // collocation lattice size per axis
    int count = 0;                      // number of cutoffs that are nonzero somewhere
    int i_max = 0;
    bool i_max_exceeded = false;
    double scale = 0.0;                 // 100 lambda_q^{-eps_R} delta_{q+1}
    std::vector<double> rho;            // rho_i for i >= 1; rho[0] is unused
    // node values chi_i(x_j, t) on the n_amp^3 collocation grid: [i][t][point]
    std::vector<std::vector<std::vector<double>>> nodes;
    std::vector<std::vector<double>> chi_sq_integral;  // [i][t]
    std::vector<double> stress_sup_on_chi0;            // per t
    std::vector<std::array<int, 3>> stress_sup_point;  // node index of that sup
    double partition_residual = 0.0;   // max |sum chi_i^2 - 1| over nodes
    double disjointness = 0.0;         // max |chi_i chi_j| over nodes, |i - j| >= 2
    FourierField stress;               // R_ell restricted to the collocation lattice
    FourierField chi_field(int i) const;  // interpolant of chi_i on the collocation lattice
};
// Throws std::runtime_error if the partition residual exceeds 1e-8.
CutoffFamily stress_cutoffs(const FourierField& R_ell, const LevelParams& L, const ParameterSchedule& sched,
                            int amp_modes);

struct AmplitudeSet {
    std::vector<int> families_used;
    // a[family][k]: combined amplitude of the k-th positive direction of that family,
    // summed over the cutoffs i with i mod 2 == family. Empty when unused.
    std::array<std::array<FourierField, 6>, 2> a;
    double wwid_node_residual = 0.0;  // Frobenius, max over nodes
    double a_constant = 0.0;          // max ||a||_inf / rho_i^{1/2}
    double gamma_ratio_max = 0.0;     // max |R_ell| / rho_i on supp chi_i
};

class GammaDomainViolation : public std::runtime_error {
public:
    GammaDomainViolation(const std::string& what, std::array<int, 3> node, int t, int i)
        : std::runtime_error(what), node(node), t(t), i(i) {}
    std::array<int, 3> node;
    int t;
    int i;
};

// rho0: one value per time sample. Throws GammaDomainViolation with the offending node.
AmplitudeSet amplitudes(const CutoffFamily& cut, const std::vector<double>& rho0, const DirectionSet& dirs,
                        const Lattice& lat);

struct Perturbation {
    FourierField wp, wc, wt, w;
    double curl_form_residual = 0.0;   // ||wp + wc - curl(wp)/lambda|| / ||w||
    double div_residual = 0.0;         // ||div(wp + wc)|| / ||w||
    double div_w_residual = 0.0;       // ||div w|| / ||grad w||
    double truncation_loss = 0.0;      // relative to ||w||^2
    std::vector<double> wp_energy;     // int |w_p|^2 per t
    FourierField wt_potential;         // Delta^{-1} div Q, where w_t = Q - grad of it
};
// Throws std::runtime_error when div w exceeds 1e-9 relative.
Perturbation assemble_perturbation(const AmplitudeSet& amps, const DirectionSet& dirs, const WaveParams& waves,
                                   const Lattice& lat);

struct PeanutsCheck {
    double residual = 0.0;  // relative
    double time_derivative_gap = 0.0;  // ||D_t w_t - product-rule d_t w_t|| / ||d_t w_t||
};
PeanutsCheck peanuts_check(const AmplitudeSet& amps, const DirectionSet& dirs, const WaveParams& waves,
                           const Lattice& lat, const FourierField& wt);

struct StressBundle {
    // Forcing pieces (vectors); the stresses are inverse_divergence(leray_project(piece)).
    FourierField linear, corrector, oscillation, commutator, defect;
    FourierField pressure_P;  // bookkeeping pressure of the oscillation term
    FourierField p_tilde;     // p_ell
    FourierField resolved;    // R_{q+1}
    FourierField p_next;      // p_{q+1}
    FourierField v_next;
    double piece_sum_residual = 0.0;  // ||sum of pieces - total forcing|| / ||total forcing||
    double truncation_loss = 0.0;
};
StressBundle assemble_stress(const IterationState& s, const Mollified& moll, const Perturbation& pert,
                             const CutoffFamily& cut, const std::vector<double>& rho0);

struct StepOptions {
    int amp_modes = 4;
    double inflation = 4.0;
    double truncation_threshold = 1e-8;
    double zero_tol = 1e-12;
    bool peanuts = true;
    NormOptions norms;
};

struct StepResult {
    IterationState next;
    nlohmann::json report;
    RhoTrack rho;
    std::vector<double> gap_next;
};

StepResult step(const IterationState& s, const ParameterSchedule& sched, const EnergyProfile& energy,
                const DirectionSet& dirs, const StepOptions& opt = {});

// The energy bookkeeping of one level without building the perturbation.
struct EnergyTrack {
    RhoTrack rho;
    std::vector<double> gap;  // e(t) - int |v_q|^2
    nlohmann::json report;
};
EnergyTrack energy_track(const IterationState& s, const ParameterSchedule& sched, const EnergyProfile& energy,
                         const DirectionSet& dirs, const StepOptions& opt = {});

struct EulerInitResult {
    IterationState state;
    nlohmann::json report;
};
// u divergence-free and mean-free; n selects lambda_n from the schedule.
EulerInitResult euler_init(const FourierField& u, int n, const ParameterSchedule& sched,
                           const NormOptions& norms = {});

}  // namespace nsr
