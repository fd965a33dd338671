#include "nsrlab/config.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace nsr {

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

namespace {

// Object view that names fields by their dotted path and rejects unknown keys.
class Section {
public:
    Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
    ~Section() = default;

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }
    const nlohmann::json& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }
    Section sub(const std::string& key) { return Section(at(key), field(key)); }

    double number(const std::string& key, double def, double lo, double hi) {
        if (!has(key)) return def;
        const auto& v = at(key);
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x) || x < lo || x > hi)
            throw ConfigError(field(key), "value " + v.dump() + " outside [" + fmt(lo) + ", " + fmt(hi) + "]");
        return x;
    }
    long long integer(const std::string& key, long long def, long long lo, long long hi) {
        if (!has(key)) return def;
        const auto& v = at(key);
        if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
        const long long x = v.get<long long>();
        if (x < lo || x > hi)
            throw ConfigError(field(key), "value " + v.dump() + " outside [" + std::to_string(lo) + ", " +
                                              std::to_string(hi) + "]");
        return x;
    }
    bool boolean(const std::string& key, bool def) {
        if (!has(key)) return def;
        const auto& v = at(key);
        if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
        return v.get<bool>();
    }
    std::string text(const std::string& key, const std::string& def) {
        if (!has(key)) return def;
        const auto& v = at(key);
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
        return v.get<std::string>();
    }
    // "p/q", an integer, or a number with an exact small denominator
    Rational rational(const std::string& key, Rational def) {
        if (!has(key)) return def;
        const auto& v = at(key);
        if (v.is_number_integer()) return Rational(v.get<long long>());
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            const auto slash = s.find('/');
            try {
                std::size_t used = 0;
                if (slash == std::string::npos) {
                    const long long n = std::stoll(s, &used);
                    if (used == s.size()) return Rational(n);
                } else {
                    const long long n = std::stoll(s.substr(0, slash), &used);
                    std::size_t used2 = 0;
                    const std::string ds = s.substr(slash + 1);
                    const long long d = std::stoll(ds, &used2);
                    if (used == slash && used2 == ds.size() && d > 0) return Rational(n, d);
                }
            } catch (const std::exception&) {
            }
        }
        throw ConfigError(field(key), "expected an integer or a \"p/q\" string");
    }
    template <class T>
    std::vector<T> list(const std::string& key, const std::vector<T>& def, T lo, T hi) {
        if (!has(key)) return def;
        const auto& v = at(key);
        if (!v.is_array() || v.empty()) throw ConfigError(field(key), "expected a non-empty array");
        std::vector<T> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string f = field(key) + "[" + std::to_string(i) + "]";
            if (std::is_integral_v<T> ? !v[i].is_number_integer() : !v[i].is_number())
                throw ConfigError(f, std::is_integral_v<T> ? "expected an integer" : "expected a number");
            const T x = v[i].get<T>();
            if (!(x >= lo && x <= hi)) throw ConfigError(f, "value " + v[i].dump() + " out of range");
            out.push_back(x);
        }
        return out;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }

private:
    static std::string fmt(double x) {
        std::ostringstream os;
        os << x;
        return os.str();
    }
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

constexpr double kBig = 1e300;

double rational_or_number(Section& s, const std::string& key, double def) {
    if (!s.has(key)) return def;
    if (s.at(key).is_number()) return s.number(key, def, 0.0, kBig);
    const Rational r = s.rational(key, Rational(0));
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::vector<double> read_samples(const std::string& path, const std::string& field) {
    std::ifstream in(path);
    if (!in) throw ConfigError(field, "cannot open sample file " + path);
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        double x;
        if (ls >> x) out.push_back(x);
    }
    return out;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc, const std::string& base_dir) {
    RunConfig c;
    Section root(doc, "");
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? p : (std::filesystem::path(base_dir) / fp).string();
    };

    root.text("description", "");
    c.seed = static_cast<std::uint64_t>(root.integer("seed", 20240601, 0, std::numeric_limits<long long>::max()));
    c.nu = root.number("nu", c.nu, 0.0, kBig);
    c.direction_families = static_cast<int>(root.integer("direction_families", 2, 1, 2));

    if (root.has("lattice")) {
        Section s = root.sub("lattice");
        c.lattice.n_space = static_cast<int>(s.integer("n_space", c.lattice.n_space, 3, 1025));
        if (c.lattice.n_space % 2 == 0) throw ConfigError(s.field("n_space"), "must be odd");
        c.lattice.n_time = static_cast<int>(s.integer("n_time", c.lattice.n_time, 5, 4097));
        c.lattice.T = s.number("T", c.lattice.T, 0.0, kBig);
        s.finish();
        try {
            c.lattice.validate();
        } catch (const std::exception& e) {
            throw ConfigError("lattice", e.what());
        }
    }

    if (root.has("initial")) {
        Section s = root.sub("initial");
        const std::string kind = s.text("kind", "zero");
        if (kind == "zero") {
            c.initial.kind = InitialSpec::Kind::zero;
        } else if (kind == "prescribed") {
            c.initial.kind = InitialSpec::Kind::prescribed;
            c.initial.data.velocity_amplitude = s.number("velocity_amplitude", 0.0, -kBig, kBig);
            c.initial.data.modulation = s.number("modulation", 0.0, -kBig, kBig);
            c.initial.data.omega = s.number("omega", 0.0, -kBig, kBig);
            c.initial.data.stress_amplitude = s.number("stress_amplitude", 0.0, -kBig, kBig);
        } else if (kind == "state_file") {
            c.initial.kind = InitialSpec::Kind::state_file;
            const std::string p = s.text("path", "");
            if (p.empty()) throw ConfigError(s.field("path"), "required for kind state_file");
            c.initial.state_file = resolve(p);
        } else {
            throw ConfigError(s.field("kind"), "expected zero, prescribed or state_file, got '" + kind + "'");
        }
        s.finish();
    }

    if (root.has("euler_init")) {
        Section s = root.sub("euler_init");
        c.euler.amplitude = s.number("amplitude", c.euler.amplitude, -kBig, kBig);
        c.euler.level = static_cast<int>(s.integer("level", 0, 0, 64));
        s.finish();
    }

    if (root.has("schedule")) {
        Section s = root.sub("schedule");
        auto& sc = c.schedule;
        sc.a = s.integer("a", sc.a, 2, 1000000);
        sc.b = s.integer("b", sc.b, 1, 1 << 30);
        sc.beta = s.rational("beta", sc.beta);
        if (sc.beta <= Rational(0)) throw ConfigError(s.field("beta"), "must be positive");
        sc.eps_R = s.number("eps_R", sc.eps_R, 1e-12, 1.0);
        sc.c0 = static_cast<int>(s.integer("c0", sc.c0, 0, 60));
        sc.p = rational_or_number(s, "p", sc.p);
        if (!(sc.p > 1.0 && sc.p < 2.0)) throw ConfigError(s.field("p"), "must lie in (1, 2)");
        if (s.has("desk")) {
            const auto& arr = s.at("desk");
            if (!arr.is_array()) throw ConfigError(s.field("desk"), "expected an array of levels");
            for (std::size_t q = 0; q < arr.size(); ++q) {
                Section d(arr[q], s.field("desk") + "[" + std::to_string(q) + "]");
                DeskLevel L;
                L.lambda_q = d.number("lambda_q", 0.0, 1.0, kBig);
                L.delta_q = d.number("delta_q", 0.0, 0.0, kBig);
                L.lambda_next = static_cast<int>(d.integer("lambda_next", 0, 1, 100000));
                L.delta_next = d.number("delta_next", 0.0, 0.0, kBig);
                L.delta_next2 = d.number("delta_next2", 0.0, 0.0, kBig);
                L.ell = d.number("ell", 0.0, 1e-300, 10.0);
                const int ls = static_cast<int>(d.integer("lambda_sigma", 1, 1, 100000));
                L.sigma = static_cast<double>(ls) / L.lambda_next;
                L.r = static_cast<int>(d.integer("r", 1, 1, 100000));
                L.mu = d.number("mu", 1.0, 1e-300, kBig);
                for (const char* k : {"lambda_q", "delta_q", "lambda_next", "delta_next", "delta_next2", "ell"})
                    if (!arr[q].contains(k)) throw ConfigError(d.field(k), "required");
                d.finish();
                sc.desk.push_back(L);
            }
        }
        s.finish();
    }

    if (root.has("energy")) {
        Section s = root.sub("energy");
        auto& e = c.energy;
        const std::string kind = s.text("kind", "constant");
        if (kind == "constant") {
            e.kind = EnergyProfile::Kind::constant;
        } else if (kind == "linear") {
            e.kind = EnergyProfile::Kind::linear;
        } else if (kind == "cosine") {
            e.kind = EnergyProfile::Kind::cosine;
        } else if (kind == "samples") {
            e.kind = EnergyProfile::Kind::samples;
        } else {
            throw ConfigError(s.field("kind"), "expected constant, linear, cosine or samples, got '" + kind + "'");
        }
        e.base = s.number("base", 0.0, -kBig, kBig);
        e.slope = s.number("slope", 0.0, -kBig, kBig);
        e.amplitude = s.number("amplitude", 0.0, -kBig, kBig);
        e.frequency = s.number("frequency", 0.0, -kBig, kBig);
        e.declared_c1 = s.number("declared_c1", -1.0, -1.0, kBig);
        if (e.kind == EnergyProfile::Kind::samples) {
            if (s.has("values")) {
                e.values = s.list<double>("values", {}, -kBig, kBig);
            } else {
                const std::string p = s.text("samples_file", "");
                if (p.empty()) throw ConfigError(s.field("values"), "samples need values or samples_file");
                e.values = read_samples(resolve(p), s.field("samples_file"));
            }
            if (static_cast<int>(e.values.size()) != c.lattice.n_time)
                throw ConfigError(s.field("values"), "expected " + std::to_string(c.lattice.n_time) +
                                                         " samples (one per time sample), got " +
                                                         std::to_string(e.values.size()));
        } else {
            s.text("samples_file", "");
            if (s.has("values")) throw ConfigError(s.field("values"), "only allowed with kind samples");
        }
        s.finish();
    }

    if (root.has("step")) {
        Section s = root.sub("step");
        c.step.amp_modes = static_cast<int>(s.integer("amp_modes", c.step.amp_modes, 0, 64));
        c.step.inflation = s.number("inflation", c.step.inflation, 1.0, kBig);
        c.step.truncation_threshold = s.number("truncation_threshold", c.step.truncation_threshold, 0.0, 1.0);
        c.step.peanuts = s.boolean("peanuts", c.step.peanuts);
        c.step.norms.oversample = static_cast<int>(s.integer("norm_oversample", c.step.norms.oversample, 1, 8));
        c.steps = static_cast<int>(s.integer("steps", c.steps, 1, 64));
        s.finish();
    }

    if (root.has("identities")) {
        Section s = root.sub("identities");
        auto& o = c.identities;
        o.n_space = static_cast<int>(s.integer("n_space", o.n_space, 5, 1025));
        if (o.n_space % 2 == 0) throw ConfigError(s.field("n_space"), "must be odd");
        o.n_time = static_cast<int>(s.integer("n_time", o.n_time, 1, 1025));
        o.T = s.number("T", o.T, 0.0, kBig);
        o.lambda = static_cast<int>(s.integer("lambda", o.lambda, 1, 100000));
        o.lambda_sigma = static_cast<int>(s.integer("lambda_sigma", o.lambda_sigma, 1, 100000));
        o.r = static_cast<int>(s.integer("r", o.r, 1, 100000));
        o.mu = s.number("mu", o.mu, 1e-300, kBig);
        o.dirichlet_r = s.list<int>("dirichlet_r", o.dirichlet_r, 1, 100000);
        o.gamma_samples = static_cast<int>(s.integer("gamma_samples", o.gamma_samples, 1, 10000000));
        s.finish();
    }

    if (root.has("analysis")) {
        Section s = root.sub("analysis");
        c.decorrelation.size = static_cast<int>(s.integer("decorrelation_corpus", c.decorrelation.size, 1, 100000));
        c.commutator.corpus_size =
            static_cast<int>(s.integer("commutator_corpus", c.commutator.corpus_size, 1, 100000));
        c.commutator.kappas = s.list<int>("commutator_kappas", c.commutator.kappas, 1, 4096);
        c.commutator.slope_tolerance = s.number("commutator_slope_tolerance", 0.2, 0.0, 10.0);
        c.commutator.ceiling = s.number("commutator_ceiling", 50.0, 0.0, kBig);
        auto& sc = c.scaling;
        sc.p_list = s.list<double>("scaling_p", sc.p_list, 1.0, std::numeric_limits<double>::infinity());
        sc.r_list = s.list<int>("scaling_r", sc.r_list, 1, 4096);
        sc.lambda_sigma_list = s.list<int>("scaling_lambda_sigma", sc.lambda_sigma_list, 1, 4096);
        sc.lambda_list = s.list<int>("scaling_lambda", sc.lambda_list, 1, 100000);
        sc.mu_list = s.list<double>("scaling_mu", sc.mu_list, 1e-300, kBig);
        sc.oversample = static_cast<int>(s.integer("scaling_oversample", sc.oversample, 1, 8));
        sc.slope_tolerance = s.number("scaling_slope_tolerance", sc.slope_tolerance, 0.0, 10.0);
        sc.derivative_tolerance = s.number("scaling_derivative_tolerance", sc.derivative_tolerance, 0.0, 10.0);
        c.audit_level = static_cast<int>(s.integer("audit_level", 0, 0, 64));
        s.finish();
    }

    if (root.has("tolerances")) {
        Section s = root.sub("tolerances");
        c.tol.residual = s.number("residual", c.tol.residual, 0.0, 1.0);
        c.tol.divergence = s.number("divergence", c.tol.divergence, 0.0, 1.0);
        c.tol.contraction = s.number("contraction", c.tol.contraction, 0.0, kBig);
        c.tol.inflation = s.number("inflation", c.tol.inflation, 1.0, kBig);
        s.finish();
    }
    root.finish();

    c.canonical = doc;
    override_seed(c, c.seed);
    return c;
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    cfg.identities.seed = seed;
    cfg.decorrelation.seed = seed;
    cfg.commutator.seed = seed;
    cfg.canonical["seed"] = seed;
    cfg.hash = sha256_hex(cfg.canonical.dump());
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
    }
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(doc, dir.empty() ? "." : dir.string());
}

}  // namespace nsr
