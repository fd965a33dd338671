#pragma once
// Parameter inequalities of one iteration level: numeric evaluation at given
// numbers and exact exponent arithmetic in powers of lambda_q.

#include <string>
#include <vector>

#include "json.hpp"

#include "nsrlab/analysis.hpp"
#include "nsrlab/geometry.hpp"
#include "nsrlab/iteration.hpp"

namespace nsr {

struct AuditItem {
    std::string anchor;
    std::string statement;
    double log10_lhs = 0.0;
    double log10_rhs = 0.0;
    double log10_slack = 0.0;  // log10(rhs / lhs)
    Verdict verdict = Verdict::inconclusive;
    nlohmann::json to_json() const;
};

// Numeric check of every item at the numbers of one level; failures are data.
std::vector<AuditItem> numeric_audit(const LevelParams& L, const ParameterSchedule& sched, const DirectionSet& dirs);

// Exponent of a power of lambda_q, as b -> infinity with beta b^2 = B held fixed,
// then eps_R -> 0 and p -> 1:  b1 b + c + inv / b + eps eps_R + (p - 1)(dp_b b + dp_0).
struct Exponent {
    Rational b1{0}, c{0}, inv{0}, eps{0}, dp_b{0}, dp_0{0};
    Exponent operator+(const Exponent& o) const;
    Exponent operator-(const Exponent& o) const;
    Exponent operator*(const Rational& s) const;
};

struct ExponentItem {
    std::string anchor;
    std::string statement;
    bool strict = false;        // "much less than"
    Exponent difference;        // lhs - rhs
    bool holds_large_b = false;
    bool determined = true;     // false when the infinitesimal parts disagree in sign
    bool has_threshold = false;
    Rational threshold_b{0};    // -c / b1 when b1 < 0 < c
    bool holds_at_b = false;    // exact evaluation at the schedule's b (limits in eps_R, p)
    nlohmann::json to_json() const;
};

struct SymbolicAudit {
    long long b = 0;
    Rational B{0};  // beta b^2
    std::vector<ExponentItem> items;
    bool all_hold_large_b = false;
    nlohmann::json to_json() const;
};

// Exponents r = lambda_{q+1}^{3/4}, sigma = lambda_{q+1}^{-15/16}, mu = lambda_{q+1}^{5/4},
// ell = lambda_q^{-20}, lambda_{q+1} = lambda_q^b, delta_{q+1} >= lambda_{q+1}^{-2 beta}.
SymbolicAudit symbolic_audit(const ParameterSchedule& sched);

struct AuditReport {
    std::vector<AuditItem> numeric;
    std::string numeric_note;  // set when the level cannot be evaluated
    SymbolicAudit symbolic;
    nlohmann::json to_json() const;
};

// waves overrides the wave parameters of the level when given.
AuditReport parameter_audit(const ParameterSchedule& sched, int q, const DirectionSet& dirs,
                            const WaveParams* waves = nullptr);

}  // namespace nsr
