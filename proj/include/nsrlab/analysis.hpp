#pragma once
// Measured constants of the L^p decorrelation and commutator estimates and
// power-law fits of the building-block norms. Randomized corpora are seeded and
// each element draws from its own generator, so results do not depend on the
// worker count.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "nsrlab/field.hpp"
#include "nsrlab/geometry.hpp"
#include "nsrlab/spectral.hpp"

namespace nsr {

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

struct FitReport {
    std::string family;     // dirichlet, eta, wave
    std::string quantity;   // value, gradient, time_derivative
    std::string abscissa;   // r, lambda_sigma, lambda, mu
    double p = 2.0;
    double exponent_fitted = 0.0;
    double exponent_predicted = 0.0;
    double tolerance = 0.0;
    double residual = 0.0;  // RMS of the log-log fit
    std::vector<std::pair<double, double>> samples;  // (scale, value)
    Verdict verdict = Verdict::inconclusive;
    std::string note;
    nlohmann::json to_json() const;
};

// Least-squares line through (log scale, log value). Fewer than 4 samples,
// non-increasing scales or non-positive values give an inconclusive report.
FitReport fit_power_law(const std::vector<std::pair<double, double>>& samples, double predicted, double tolerance);

// ---- decorrelation

struct DecorrelationResult {
    Verdict verdict = Verdict::inconclusive;
    std::vector<std::string> failed_hypotheses;
    int kappa = 0;
    double lambda = 0.0;
    int M = 0;
    double p = 1.0;
    double C_f = 0.0;               // max_{j <= M+4} ||D^j f||_p / lambda^j
    double ratio = 0.0;             // ||f g||_p / (C_f ||g||_p)
    double bound = 0.0;             // 1 + 2 |T^3|
    double margin = 0.0;            // bound / ratio
    double normalized_ratio = 0.0;  // ||f g||_p |T^3|^{1/p} / (||f||_p ||g||_p)
    nlohmann::json to_json() const;
};

// f and g on one lattice that resolves their product; g must be (2 pi / kappa)-periodic.
// p in {1, 2}.
DecorrelationResult decorrelation_test(const FourierField& f, const FourierField& g, int kappa, double lambda,
                                       int M, double p, const NormOptions& opt = {});

// Smallest admissible kappa and M for a given lambda.
int decorrelation_min_kappa(double lambda);
int decorrelation_min_M(double lambda, int kappa);

struct CorpusOptions {
    std::uint64_t seed = 20240601;
    int size = 200;
};

struct DecorrelationCorpus {
    std::vector<DecorrelationResult> entries;  // entry 0: squared Dirichlet profile
    int evaluated = 0;
    int inconclusive = 0;
    double worst_ratio = 0.0;
    double worst_adversarial_ratio = 0.0;
    double bound = 0.0;
    Verdict verdict = Verdict::inconclusive;
    nlohmann::json to_json() const;
};
DecorrelationCorpus decorrelation_corpus(const CorpusOptions& opt = {});

// ---- commutator

// Mode-wise |k|^{-1} on the nonzero modes.
FourierField inverse_gradient_magnitude(const FourierField& f);

struct CommutatorResult {
    Verdict verdict = Verdict::inconclusive;
    std::vector<std::string> failed_hypotheses;
    int kappa = 0;
    double lambda = 0.0;
    int L = 0;
    double p = 2.0;
    double C_a = 0.0;            // max_{j <= L} ||D^j a||_inf / lambda^j
    double mean_removed = 0.0;   // |mean of a P_{>=kappa} f|
    double measured = 0.0;       // || |grad|^{-1} (a P_{>=kappa} f - mean) ||_p
    double f_norm = 0.0;         // ||f||_p
    double high_norm = 0.0;      // ||P_{>=kappa} f||_p
    double bound_factor = 0.0;   // 1 + lambda^L kappa^{2-L}
    double ratio = 0.0;          // measured kappa / (C_a bound_factor ||f||_p)
    double ceiling = 50.0;
    nlohmann::json to_json() const;
};

// a and f scalar on one lattice resolving a P_{>=kappa} f; p in (1, 2].
CommutatorResult commutator_test(const FourierField& a, const FourierField& f, int kappa, double lambda, int L,
                                 double p, double ceiling = 50.0, const NormOptions& opt = {});

struct CommutatorStudy {
    std::vector<CommutatorResult> corpus;
    double worst_ratio = 0.0;
    double ceiling = 50.0;
    Verdict corpus_verdict = Verdict::inconclusive;
    std::vector<CommutatorResult> sweep;  // fixed a, f over kappa
    FitReport kappa_slope;                // measured norm against kappa, predicted -1
    FitReport kappa_slope_relative;       // measured / ||P_{>=kappa} f||_p against kappa
    nlohmann::json to_json() const;
};
struct CommutatorStudyOptions {
    std::uint64_t seed = 20240601;
    int corpus_size = 24;
    std::vector<int> kappas{8, 16, 32, 64};
    double slope_tolerance = 0.2;
    double ceiling = 50.0;
};
CommutatorStudy commutator_study(const CommutatorStudyOptions& opt = {});

// ---- scaling laws

enum class BlockFamily { dirichlet, eta, wave };
std::string to_string(BlockFamily f);
BlockFamily block_family_from_string(const std::string& s);

struct ScalingOptions {
    std::vector<double> p_list{4.0 / 3.0, 2.0, 4.0};
    std::vector<int> r_list{2, 4, 8, 16};
    std::vector<int> lambda_sigma_list{1, 2, 3, 4};
    std::vector<int> lambda_list{10, 20, 40, 80};
    std::vector<double> mu_list{1.0, 2.0, 4.0, 8.0};
    int oversample = 2;
    double slope_tolerance = 0.15;
    double derivative_tolerance = 0.2;
};

// dirichlet: ||D_r||_p against r.
// eta: value, gradient and time derivative against r; gradient against lambda*sigma;
//      time derivative against mu.
// wave: value against r; gradient against lambda.
std::vector<FitReport> scaling_study(BlockFamily family, const DirectionSet& dirs, const ScalingOptions& opt = {});

}  // namespace nsr
