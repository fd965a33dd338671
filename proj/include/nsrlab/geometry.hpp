#pragma once
// Rational direction families, their Beltrami frames and the geometric-lemma coefficients.

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace nsr {

using Rational = boost::rational<long long>;
using RVec3 = std::array<Rational, 3>;
using Vec3 = std::array<double, 3>;
using CVec3 = std::array<std::complex<double>, 3>;
using Sym3 = std::array<double, 6>;  // upper-triangular order 11,12,13,22,23,33

RVec3 cross(const RVec3& a, const RVec3& b);
Rational dot(const RVec3& a, const RVec3& b);
Vec3 to_double(const RVec3& v);

struct Direction {
    RVec3 xi;       // unit vector
    RVec3 A;        // unit, orthogonal to xi, shared by xi and -xi
    RVec3 xi_x_A;   // xi x A
    int family = 0;
    int index = 0;  // position in its family; -xi sits at index +/- 6
    bool positive = true;

    Vec3 xi_d() const { return to_double(xi); }
    CVec3 B() const;  // (A + i xi x A)/sqrt(2)
};

struct Family {
    std::vector<Direction> dirs;  // 12 entries: 6 positive representatives then their negatives
    Rational c_sq;                // squared minimum half-distance within the family
    // Exact inverse of the 6x6 map c -> sum_{positive} c_xi (Id - xi xi^T).
    std::array<std::array<Rational, 6>, 6> inverse;
    std::array<std::array<double, 6>, 6> inverse_d;

    const Direction& opposite(const Direction& d) const { return dirs[(d.index + 6) % 12]; }
};

struct DirectionSet {
    std::vector<Family> families;
    long long N_Lambda = 1;
    Rational c_sq;          // min over families of the within-family constant, squared
    Rational c_union_sq;    // same constant taken over the union of all families
    double eps_gamma = 0.0; // sampled admissible radius (already halved)
    long eps_samples = 0;
    Sym3 eps_witness{};     // unit-norm direction that failed at the bisection's failing radius
    double eps_fail_radius = 0.0;

    double c_Lambda() const;
    int size() const { return static_cast<int>(families.size()); }
};

DirectionSet build_direction_set(int n_families = 2);

// Frobenius norm with off-diagonal entries counted twice.
double frobenius(const Sym3& m);
Sym3 identity_sym();

// Squared coefficients c_xi solving sum_{positive} c_xi (Id - xi xi^T) = R, indexed
// like Family::dirs (c at -xi equals c at xi). No positivity check.
std::array<double, 12> gamma_squared(const Sym3& R, const Family& fam);
// sqrt of the above; throws std::domain_error if any coefficient is <= 0.
std::array<double, 12> gamma(const Sym3& R, const Family& fam);

struct EpsilonGammaResult {
    double eps = 0.0;         // passing radius / 2
    double pass_radius = 0.0;
    double fail_radius = 0.0;
    Sym3 witness{};
    long samples_per_radius = 0;
};
EpsilonGammaResult estimate_epsilon_gamma(const DirectionSet& dirs, std::uint64_t seed = 20240601,
                                          long samples_per_radius = 10000);

// Text form: one line per direction with family, index and numerator/denominator pairs.
std::string serialize_directions(const DirectionSet& dirs);

}  // namespace nsr
