#include "nsrlab/audit.hpp"

#include <cmath>
#include <stdexcept>

namespace nsr {

nlohmann::json AuditItem::to_json() const {
    return {{"anchor", anchor},
            {"statement", statement},
            {"measured", log10_lhs},
            {"bound", log10_rhs},
            {"slack", log10_slack},
            {"scale", "log10"},
            {"verdict", to_string(verdict)}};
}

namespace {

AuditItem item(const std::string& anchor, const std::string& statement, double log_lhs, double log_rhs) {
    AuditItem a;
    a.anchor = anchor;
    a.statement = statement;
    a.log10_lhs = log_lhs / std::log(10.0);
    a.log10_rhs = log_rhs / std::log(10.0);
    a.log10_slack = a.log10_rhs - a.log10_lhs;
    a.verdict = (std::isfinite(log_lhs) && std::isfinite(log_rhs)) ? (log_lhs <= log_rhs ? Verdict::pass : Verdict::fail)
                                                                     : Verdict::inconclusive;
    return a;
}

double log_sum(const std::vector<double>& logs) {
    double m = -INFINITY;
    for (double x : logs) m = std::max(m, x);
    double acc = 0.0;
    for (double x : logs) acc += std::exp(x - m);
    return m + std::log(acc);
}

}  // namespace

std::vector<AuditItem> numeric_audit(const LevelParams& L, const ParameterSchedule& sched, const DirectionSet& dirs) {
    const double lq = std::log(L.lambda_q), ln = std::log(double(L.waves.lambda));
    const double sigma = std::log(double(L.waves.lambda_sigma)) - ln;
    const double r = std::log(double(L.waves.r)), mu = std::log(L.waves.mu), ell = std::log(L.ell);
    const double d1 = std::log(L.delta_next), d2 = std::log(L.delta_next2);
    const double p = sched.p;
    const double c_bound = std::log(dirs.c_Lambda() / (10.0 * double(dirs.N_Lambda)));

    std::vector<AuditItem> out;
    out.push_back(item("mollifier_scale_lower", "(sigma lambda_{q+1})^{-1/2} <= ell", -0.5 * (sigma + ln), ell));
    out.push_back(item("mollifier_scale_upper", "ell <= lambda_q^{-19} delta_{q+1}", ell, -19.0 * lq + d1));
    out.push_back(item("concentration_width", "sigma r <= c_Lambda / (10 N_Lambda)", sigma + r, c_bound));
    out.push_back(item("corrector_time_scale", "sigma r^{5/2} <= mu", sigma + 2.5 * r, mu));
    out.push_back(item("frequency_spacing_rate", "lambda_{q+1} sigma <= mu", ln + sigma, mu));
    out.push_back(item("mollified_time_rate", "ell^{1/2} mu <= sigma^{-1} r^{1/2}", 0.5 * ell + mu, -sigma + 0.5 * r));
    out.push_back(item("mollifier_inverse", "ell^{-1} <= lambda_{q+1} delta_{q+1}^{1/2} sigma r", -ell,
                       ln + 0.5 * d1 + sigma + r));
    const double rhs = -2.0 * sched.eps_R * ln + d2;
    const std::vector<double> terms = {
        -2.0 * ell + sigma + mu + (2.5 - 3.0 / p) * r,
        (1.5 * r - ell - mu) / p + 3.0 * (1.0 - 1.0 / p) * ln,
        (3.0 - 3.0 / p) * r - 3.0 * ell - ln - sigma,
        sigma + (4.0 - 3.0 / p) * r - 3.0 * ell,
        -10.0 * lq,
    };
    const char* names[] = {"ell^{-2} sigma mu r^{5/2-3/p}",
                           "(r^{3/2} ell^{-1} mu^{-1})^{1/p} lambda_{q+1}^{3(1-1/p)}",
                           "r^{3-3/p} / (ell^3 lambda_{q+1} sigma)", "sigma r^{4-3/p} / ell^3", "lambda_q^{-10}"};
    for (int i = 0; i < 5; ++i)
        out.push_back(item("stress_budget_term_" + std::to_string(i + 1),
                           std::string(names[i]) + " <= lambda_{q+1}^{-2 eps_R} delta_{q+2}", terms[i], rhs));
    out.push_back(item("stress_budget_total", "sum of the five terms <= lambda_{q+1}^{-2 eps_R} delta_{q+2}",
                       log_sum(terms), rhs));
    return out;
}

// ---------------------------------------------------------------- exponents

Exponent Exponent::operator+(const Exponent& o) const {
    return {b1 + o.b1, c + o.c, inv + o.inv, eps + o.eps, dp_b + o.dp_b, dp_0 + o.dp_0};
}
Exponent Exponent::operator-(const Exponent& o) const { return *this + o * Rational(-1); }
Exponent Exponent::operator*(const Rational& s) const {
    return {b1 * s, c * s, inv * s, eps * s, dp_b * s, dp_0 * s};
}

namespace {

nlohmann::json rational_json(const Rational& r) {
    return std::to_string(r.numerator()) + (r.denominator() == 1 ? "" : "/" + std::to_string(r.denominator()));
}

int sign(const Rational& r) { return r > Rational(0) ? 1 : (r < Rational(0) ? -1 : 0); }

ExponentItem judge(const std::string& anchor, const std::string& statement, const Exponent& lhs, const Exponent& rhs,
                   bool strict, long long b) {
    ExponentItem it;
    it.anchor = anchor;
    it.statement = statement;
    it.strict = strict;
    it.difference = lhs - rhs;
    const Exponent& d = it.difference;
    // infinitesimal part: eps_R and p - 1 are chosen after b, so only their signs matter
    int tail = 0;
    for (const Rational& x : {d.eps, d.dp_b, d.dp_0}) {
        const int s = sign(x);
        if (s == 0) continue;
        if (tail == 0) tail = s;
        else if (tail != s) it.determined = false;
    }
    auto decide = [&](int leading) {
        if (leading != 0) return leading < 0;
        if (!it.determined) return false;
        if (tail != 0) return tail < 0;
        return !strict;
    };
    int leading = sign(d.b1);
    if (leading == 0) leading = sign(d.c);
    if (leading == 0) leading = sign(d.inv);
    it.holds_large_b = decide(leading);
    if (d.b1 < Rational(0) && d.c > Rational(0)) {
        it.has_threshold = true;
        it.threshold_b = -d.c / d.b1;
    }
    const Rational at_b = d.b1 * Rational(b) + d.c + d.inv / Rational(b);
    it.holds_at_b = decide(sign(at_b));
    return it;
}

}  // namespace

nlohmann::json ExponentItem::to_json() const {
    return {{"anchor", anchor},
            {"statement", statement},
            {"strict", strict},
            {"exponent_difference",
             {{"b", rational_json(difference.b1)},
              {"const", rational_json(difference.c)},
              {"inv_b", rational_json(difference.inv)},
              {"eps_R", rational_json(difference.eps)},
              {"p_minus_1_times_b", rational_json(difference.dp_b)},
              {"p_minus_1", rational_json(difference.dp_0)}}},
            {"determined", determined},
            {"threshold_b", has_threshold ? rational_json(threshold_b) : nlohmann::json(nullptr)},
            {"holds_at_b", holds_at_b},
            {"verdict", holds_large_b ? "pass" : "fail"}};
}

nlohmann::json SymbolicAudit::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& x : items) j.push_back(x.to_json());
    return {{"b", b},
            {"beta_b_squared", rational_json(B)},
            {"unit", "log lambda_q"},
            {"items", j},
            {"verdict", all_hold_large_b ? "pass" : "fail"}};
}

SymbolicAudit symbolic_audit(const ParameterSchedule& sched) {
    SymbolicAudit out;
    out.b = sched.b;
    out.B = sched.beta * Rational(sched.b) * Rational(sched.b);
    const Rational B = out.B;
    auto pw = [](Rational b1, Rational c = Rational(0)) {
        Exponent e;
        e.b1 = b1;
        e.c = c;
        return e;
    };
    const Exponent one{};
    const Exponent lam_q = pw(0, 1);
    const Exponent lam = pw(1);
    const Exponent r = pw(Rational(3, 4));
    const Exponent sigma = pw(Rational(-15, 16));
    const Exponent mu = pw(Rational(5, 4));
    const Exponent ell = pw(0, -20);
    Exponent delta1;  // lambda_1^{3 beta} >= 1 is dropped: it only enlarges the right-hand sides
    delta1.inv = Rational(-2) * B;
    Exponent delta2;
    delta2.c = Rational(-2) * B;
    Exponent budget = delta2;
    budget.eps = Rational(-2);  // lambda_{q+1}^{-2 eps_R}: coefficient of eps_R b

    // r^{alpha - 3/p} at p = 1 + (p - 1): exponent (alpha - 3) r + 3 (p - 1) r
    auto r_pow = [&](Rational alpha) {
        Exponent e = r * (alpha - Rational(3));
        e.dp_b += Rational(3) * r.b1;
        return e;
    };

    auto& v = out.items;
    const long long b = sched.b;
    v.push_back(judge("mollifier_scale_lower", "(sigma lambda_{q+1})^{-1/2} << ell", (sigma + lam) * Rational(-1, 2), ell,
                      true, b));
    v.push_back(judge("mollifier_scale_upper", "ell << lambda_q^{-19} delta_{q+1}", ell,
                      lam_q * Rational(-19) + delta1, true, b));
    v.push_back(judge("concentration_width", "sigma r <= c_Lambda / (10 N_Lambda)", sigma + r, one, false, b));
    v.push_back(judge("corrector_time_scale", "sigma r^{5/2} <= mu", sigma + r * Rational(5, 2), mu, false, b));
    v.push_back(judge("frequency_spacing_rate", "lambda_{q+1} sigma <= mu", lam + sigma, mu, false, b));
    v.push_back(judge("mollified_time_rate", "ell^{1/2} mu <= sigma^{-1} r^{1/2}", ell * Rational(1, 2) + mu,
                      sigma * Rational(-1) + r * Rational(1, 2), false, b));
    v.push_back(judge("mollifier_inverse", "ell^{-1} <= lambda_{q+1} delta_{q+1}^{1/2} sigma r", ell * Rational(-1),
                      lam + delta1 * Rational(1, 2) + sigma + r, false, b));

    const Exponent t1 = ell * Rational(-2) + sigma + mu + r_pow(Rational(5, 2));
    // (X)^{1/p} lambda^{3(1 - 1/p)} with X = r^{3/2} ell^{-1} mu^{-1}: X (1 - (p - 1)) + 3 (p - 1) lambda
    const Exponent X = r * Rational(3, 2) - ell - mu;
    Exponent t2 = X;
    t2.dp_b += Rational(-1) * X.b1 + Rational(3) * lam.b1;
    t2.dp_0 += Rational(-1) * X.c;
    const Exponent t3 = r_pow(Rational(3)) - ell * Rational(3) - lam - sigma;
    const Exponent t4 = sigma + r_pow(Rational(4)) - ell * Rational(3);
    const Exponent t5 = lam_q * Rational(-10);
    const Exponent terms[] = {t1, t2, t3, t4, t5};
    const char* names[] = {"ell^{-2} sigma mu r^{5/2-3/p}",
                           "(r^{3/2} ell^{-1} mu^{-1})^{1/p} lambda_{q+1}^{3(1-1/p)}",
                           "r^{3-3/p} / (ell^3 lambda_{q+1} sigma)", "sigma r^{4-3/p} / ell^3", "lambda_q^{-10}"};
    for (int i = 0; i < 5; ++i)
        v.push_back(judge("stress_budget_term_" + std::to_string(i + 1),
                          std::string(names[i]) + " <~ lambda_{q+1}^{-2 eps_R} delta_{q+2}", terms[i], budget, false,
                          b));
    out.all_hold_large_b = true;
    for (const auto& x : v) out.all_hold_large_b = out.all_hold_large_b && x.holds_large_b;
    return out;
}

nlohmann::json AuditReport::to_json() const {
    nlohmann::json n = nlohmann::json::array();
    for (const auto& x : numeric) n.push_back(x.to_json());
    nlohmann::json j = {{"numeric", n}, {"symbolic", symbolic.to_json()}};
    if (!numeric_note.empty()) j["numeric_note"] = numeric_note;
    return j;
}

AuditReport parameter_audit(const ParameterSchedule& sched, int q, const DirectionSet& dirs, const WaveParams* waves) {
    AuditReport rep;
    rep.symbolic = symbolic_audit(sched);
    try {
        LevelParams L = sched.level(q);
        if (waves) L.waves = *waves;
        rep.numeric = numeric_audit(L, sched, dirs);
    } catch (const std::domain_error& e) {
        rep.numeric_note = e.what();
    }
    return rep;
}

}  // namespace nsr
