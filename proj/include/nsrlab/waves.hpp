#pragma once
// Dirichlet kernels, directed concentration profiles, Beltrami plane waves and
// intermittent Beltrami waves, in dense (real lattice) and sparse (complex) form.

#include <array>
#include <map>

#include "nsrlab/field.hpp"
#include "nsrlab/geometry.hpp"

namespace nsr {

struct WaveParams {
    int lambda = 0;        // multiple of N_Lambda
    int lambda_sigma = 1;  // lambda * sigma, a positive integer
    int r = 1;             // kernel half-width
    double mu = 1.0;       // temporal oscillation rate
    double sigma() const { return static_cast<double>(lambda_sigma) / lambda; }
};

struct WaveCheck {
    double sigma_r = 0.0;
    double sigma_r_bound = 0.0;  // c_Lambda / (10 N_Lambda)
    bool sigma_r_ok = false;
    bool annulus_ok = false;     // concentration radius below lambda/2
};

// Throws std::invalid_argument on hard violations (lambda not a multiple of
// N_Lambda, lambda*sigma < 1, r < 1, mu <= 0). Soft bounds are returned.
WaveCheck check_wave_params(const WaveParams& p, const DirectionSet& dirs);

// Largest |k_i| over the modes of eta (per axis) and of the intermittent wave.
int eta_bandwidth(const Direction& d, const WaveParams& p, long long N);
int wave_bandwidth(const Direction& d, const WaveParams& p, long long N);
// Largest Euclidean |k| over the modes of eta.
double eta_radius(const Direction& d, const WaveParams& p, long long N);

// Coefficients (2r+1)^{-3/2} on {-r..r}^3, constant in time.
FourierField dirichlet_kernel(const Lattice& lat, int r);

// eta at every time sample of the lattice; the time dependence is an exact phase.
FourierField eta(const Lattice& lat, const Direction& d, const WaveParams& p, long long N);
// Exact time derivative of eta.
FourierField eta_time_derivative(const Lattice& lat, const Direction& d, const WaveParams& p, long long N);

// Real pair W_xi + W_{-xi} = B e^{i lambda xi.x} + c.c.; |U|^2 = 2 pointwise.
FourierField beltrami_pair(const Lattice& lat, const Direction& d, int lambda);
// eta * (W_xi + W_{-xi}), the real pair of intermittent waves. Throws if the
// wave does not fit on the lattice.
FourierField intermittent_pair(const Lattice& lat, const Direction& d, const WaveParams& p, long long N);

// ---- sparse complex representation

using Key3 = std::array<int, 3>;
using SparseScalar = std::map<Key3, cplx>;
using SparseVector = std::map<Key3, CVec3>;
using SparseTensor = std::map<Key3, std::array<cplx, 9>>;  // row-major 3x3

SparseScalar eta_sparse(const Direction& d, const WaveParams& p, long long N, double t);
// W_xi alone: B_xi at lambda xi.
SparseVector beltrami_sparse(const Direction& d, int lambda);
// eta_xi * W_xi
SparseVector intermittent_sparse(const Direction& d, const WaveParams& p, long long N, double t);
SparseTensor outer_sparse(const SparseVector& f, const SparseVector& g);
SparseScalar dot_sparse(const SparseVector& f, const SparseVector& g);

// Smallest and largest |k| over coefficients with modulus above tol.
template <class Map>
std::array<double, 2> support_radii(const Map& m, double tol);

// ---- identity checks (all return relative residuals)

// max over the family of |i lambda xi x B - lambda B| / lambda and |xi . B|.
double beltrami_eigen_residual(const Family& fam, int lambda);
// Frobenius residual of sum_{xi in fam} gamma^2 mean(W_xi (x) W_{-xi}) - R, dense.
double mean_tensor_check(const Lattice& lat, const Family& fam, const WaveParams& p, long long N,
                         const Sym3& R);
// div of the low part of P (x) P against grad eta^2 - (xi/mu) d_t eta^2.
double oscillation_identity_check(const Lattice& lat, const Direction& d, const WaveParams& p, long long N);
// div(P (x) P' + P' (x) P) against (U'.grad s)U + (U.grad s)U' + s grad(U.U'), s = eta eta'.
double pair_identity_check(const Lattice& lat, const Direction& d, const Direction& e, const WaveParams& p,
                           long long N);

}  // namespace nsr
