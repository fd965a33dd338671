#pragma once
// Operator toolbox on FourierField: derivatives, projectors, inverse divergence,
// mollification, norms, dealiased products and the Navier-Stokes-Reynolds residual.

#include <limits>
#include <string>
#include <vector>

#include "nsrlab/field.hpp"

namespace nsr {

enum class Axis { x1 = 0, x2 = 1, x3 = 2, t = 3 };

// Spatial axes: exact multiplication by (i k)^order. Time axis: the fixed
// 4th-order central stencil with one-sided 5-point stencils at both ends.
FourierField derivative(const FourierField& f, Axis axis, int order = 1);
FourierField time_derivative(const FourierField& f);

FourierField gradient(const FourierField& scalar);
FourierField divergence(const FourierField& f);  // vector -> scalar, tensor -> vector
FourierField curl(const FourierField& v);
FourierField laplacian(const FourierField& f);
FourierField inverse_laplacian(const FourierField& f);  // mode 0 -> 0
// (grad v + grad v^T)/2 as a symmetric tensor.
FourierField sym_gradient(const FourierField& v);

FourierField leray_project(const FourierField& v);

struct Band {
    enum Kind { leq, geq, neq0, annulus } kind = neq0;
    double k1 = 0.0;
    double k2 = 0.0;
    static Band at_most(double k) { return {leq, k, 0.0}; }
    static Band at_least(double k) { return {geq, k, 0.0}; }
    static Band nonzero() { return {neq0, 0.0, 0.0}; }
    static Band between(double lo, double hi) { return {annulus, lo, hi}; }
};
FourierField freq_project(const FourierField& f, const Band& band);
bool band_contains(const Band& band, long k_sq);

// Symmetric trace-free R with div R = v - mean(v), per-mode symbol.
FourierField inverse_divergence(const FourierField& v);

FourierField trace_free_part(const FourierField& tensor);
FourierField trace_of(const FourierField& tensor);
FourierField mean_part(const FourierField& f);  // keeps only mode 0

// Compact radial bump of support radius 2 and unit mass.
double bump(double s);
double bump_mass_1d();
double bump_mass_3d();
double bump_hat_1d(double xi);  // normalized, value 1 at 0
double bump_hat_3d(double xi);  // radial 3-D transform, normalized

// Normalized time weights bump(m dt / ell), m = -reach..reach; a single 1 when ell < dt/2.
std::vector<double> time_mollifier_weights(double dt, double ell);
// Time mollification of uniformly spaced samples, indices clamped at both ends.
std::vector<double> mollify_samples(const std::vector<double>& values, double dt, double ell);

enum class MollifyDomain { space, time, both };
FourierField mollify(const FourierField& f, double ell, MollifyDomain domain);

struct NormSpec {
    enum Kind { Lp, W1p, CN, Hs } kind = Lp;
    double p = 2.0;  // inf allowed for Lp/W1p
    int N = 0;
    double s = 0.0;
    static NormSpec lp(double p) { return {Lp, p, 0, 0.0}; }
    static NormSpec linf() { return {Lp, std::numeric_limits<double>::infinity(), 0, 0.0}; }
    static NormSpec w1p(double p) { return {W1p, p, 0, 0.0}; }
    static NormSpec cn(int N) { return {CN, 0.0, N, 0.0}; }
    static NormSpec hs(double s) { return {Hs, 0.0, 0, s}; }
};

struct NormOptions {
    int oversample = 2;  // physical grid is at least oversample * n_space per axis
};

// Time-dependent fields reduce with the sup over time samples.
double norm(const FourierField& f, const NormSpec& spec, const NormOptions& opt = {});
// Exact L^2 norm of one time sample via Parseval.
double l2_norm_slice(const FourierField& f, int t);
double l2_norm(const FourierField& f);  // sup over t
// Mean over the torus of the inner product sum_c f_c g_c at time t.
// Grid quadrature of the pointwise Euclidean/Frobenius magnitude, sup over t.
// Kept apart from norm(), which only admits p > 1.
double l1_norm(const FourierField& f, const NormOptions& opt = {});
double l1_norm_slice(const FourierField& f, int t, const NormOptions& opt = {});
double mean_inner(const FourierField& f, const FourierField& g, int t);
// L^p norms (p >= 1 or inf) at time t of the pointwise magnitude of all components of
// all parts together, from one grid evaluation. Parts must share a lattice.
std::vector<double> lp_norms_slice(const std::vector<const FourierField*>& parts, int t,
                                   const std::vector<double>& ps, const NormOptions& opt = {});

enum class Contraction {
    scalar,  // scalar*scalar or scalar*vector or scalar*tensor
    outer,   // symmetrized vector outer product (f g^T + g f^T)/2
    dot,     // vector.vector -> scalar
    matvec,  // symmetric tensor times vector -> vector
    cross    // vector x vector -> vector
};

struct ProductResult {
    FourierField field;
    double truncation_loss = 0.0;  // discarded L^2 energy, summed over components and time
};

ProductResult dealiased_product(const FourierField& f, const FourierField& g, Contraction c);

// Largest |k_i| over nonzero coefficients (0 for a constant field).
int bandwidth(const FourierField& f);

struct ResidualResult {
    FourierField field;
    double relative = 0.0;  // sup_t ||F||_2 / sup_t max term ||.||_2
    double absolute = 0.0;
    double scale = 0.0;
};
ResidualResult nsr_residual(const FourierField& v, const FourierField& p, const FourierField& R,
                            double nu);

}  // namespace nsr
