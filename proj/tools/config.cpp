#include "config.hpp"

#include <koopq/csv.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace koopq::cli {

using nlohmann::json;

namespace {

// Reads members of one JSON object and rejects anything left unread.
class Block {
public:
    Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "expected an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(at(key) + ": " + what);
    }

    std::string at(const std::string& key) const {
        if (path_.empty()) return key.empty() ? "<root>" : key;
        return key.empty() ? path_ : path_ + "." + key;
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& raw(const std::string& key) { return has(key), j_.at(key); }

    template <class T>
    void get(const std::string& key, T& out) {
        if (!has(key)) return;
        try {
            out = read<T>(j_.at(key));
        } catch (const json::exception&) {
            fail(key, "wrong type");
        }
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) fail(k, "unknown key");
    }

private:
    template <class T>
    static T read(const json& v) {
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw json::type_error::create(302, "number expected", &v);
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw json::type_error::create(302, "integer expected", &v);
            if constexpr (std::is_unsigned_v<T>)
                if (v.is_number_integer() && !v.is_number_unsigned())
                    throw json::type_error::create(302, "nonnegative integer expected", &v);
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw json::type_error::create(302, "string expected", &v);
        } else {
            if (!v.is_array()) throw json::type_error::create(302, "array expected", &v);
            T out;
            for (const auto& e : v) out.push_back(read<typename T::value_type>(e));
            return out;
        }
        return v.get<T>();
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class T>
void require(bool ok, const Block& b, const std::string& key, const T& what) {
    if (!ok) b.fail(key, what);
}

bool finite_all(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    Block root(j, "");
    int version = -1;
    root.get("schema_version", version);
    require(version == schema_version, root, "schema_version",
            "must be present and equal to " + std::to_string(schema_version));
    root.get("seed", cfg.seed);

    if (root.has("system")) {
        Block b(root.raw("system"), "system");
        auto& s = cfg.system;
        b.get("kind", s.kind);
        b.get("alpha", s.alpha);
        b.get("states", s.states);
        b.get("x0", s.x0);
        b.get("initial_state", s.initial_state);
        b.get("dt", s.dt);
        b.get("samples", s.samples);
        b.finish();
        require(s.kind == "rotation" || s.kind == "orbit", b, "kind", "must be rotation or orbit");
        require(!s.alpha.empty() && s.alpha.size() <= 2, b, "alpha", "must have 1 or 2 entries");
        require(finite_all(s.alpha), b, "alpha", "entries must be finite");
        for (double a : s.alpha) require(a != 0.0, b, "alpha", "entries must be nonzero");
        require(s.x0.size() == s.alpha.size(), b, "x0", "length must match alpha");
        require(finite_all(s.x0), b, "x0", "entries must be finite");
        require(s.states >= 1 && s.states <= 64, b, "states", "must lie in [1, 64]");
        require(s.initial_state >= 0 && s.initial_state < s.states, b, "initial_state",
                "must lie in [0, states)");
        require(s.dt > 0.0 && std::isfinite(s.dt), b, "dt", "must be > 0");
        require(s.samples >= 1 && s.samples <= 10000000, b, "samples", "must lie in [1, 1e7]");
    }

    if (root.has("kernel")) {
        Block b(root.raw("kernel"), "kernel");
        auto& k = cfg.kernel;
        b.get("tau", k.tau);
        b.get("p", k.p);
        b.get("bandwidth", k.bandwidth);
        b.get("galerkin_bandwidth", k.galerkin_bandwidth);
        std::size_t dim = cfg.dim();
        b.get("dim", dim);
        b.finish();
        require(dim == cfg.dim(), b, "dim", "must equal the length of system.alpha");
        require(k.tau > 0.0 && std::isfinite(k.tau), b, "tau", "must be > 0");
        require(k.p > 0.0 && k.p < 1.0, b, "p", "must lie in (0,1)");
        require(k.bandwidth >= 1 && k.bandwidth <= 256, b, "bandwidth", "must lie in [1, 256]");
        require(k.galerkin_bandwidth >= 1 && k.galerkin_bandwidth <= 16, b, "galerkin_bandwidth",
                "must lie in [1, 16]");
    }

    if (root.has("fock")) {
        Block b(root.raw("fock"), "fock");
        auto& f = cfg.fock;
        b.get("sigma_w", f.sigma_w);
        b.get("p_w", f.p_w);
        b.get("nmax", f.nmax);
        b.get("modes", f.modes);
        b.get("sigma", f.sigma);
        b.get("kernel_kappa", f.kernel_kappa);
        b.get("m", f.m);
        b.get("grid", f.grid);
        b.get("x", f.x);
        b.get("times", f.times);
        b.get("tn_orders", f.tn_orders);
        b.get("tn_kappa", f.tn_kappa);
        b.get("tn_sigma", f.tn_sigma);
        b.get("tn_bandwidth", f.tn_bandwidth);
        b.finish();
        require(f.sigma_w > 0.0, b, "sigma_w", "must be > 0");
        require(f.p_w > 0.0 && f.p_w < 1.0, b, "p_w", "must lie in (0,1)");
        require(f.nmax >= 1 && f.nmax <= 6, b, "nmax", "must lie in [1, 6]");
        require(f.modes >= 1 && f.modes <= 8, b, "modes", "must lie in [1, 8]");
        require(f.sigma > 0.0, b, "sigma", "must be > 0");
        require(f.kernel_kappa > 0.0, b, "kernel_kappa", "must be > 0");
        require(!f.m.empty(), b, "m", "must not be empty");
        for (int m : f.m) require(m >= 1 && m <= f.nmax, b, "m", "entries must lie in [1, nmax]");
        require(f.grid >= 8 && f.grid <= 100000, b, "grid", "must lie in [8, 1e5]");
        require(f.x.size() == cfg.dim() && finite_all(f.x), b, "x", "must be a finite point of the torus");
        require(!f.times.empty() && finite_all(f.times), b, "times", "must be a nonempty finite list");
        for (int n : f.tn_orders) require(n >= 1 && n <= 3, b, "tn_orders", "entries must lie in [1, 3]");
        require(f.tn_kappa > 0.0, b, "tn_kappa", "must be > 0");
        require(f.tn_sigma >= 0.0, b, "tn_sigma", "must be >= 0");
        require(f.tn_bandwidth >= 1 && f.tn_bandwidth <= 128, b, "tn_bandwidth", "must lie in [1, 128]");
    }

    if (root.has("qmda")) {
        Block b(root.raw("qmda"), "qmda");
        auto& q = cfg.qmda;
        b.get("rank", q.rank);
        b.get("steps", q.steps);
        b.get("grid", q.grid);
        b.get("observations_csv", q.observations_csv);
        if (b.has("observation")) {
            Block o(b.raw("observation"), "qmda.observation");
            auto& ob = q.observation;
            o.get("kernel", ob.kernel);
            o.get("epsilon", ob.epsilon);
            o.get("delta", ob.delta);
            o.get("noise_sd", ob.noise_sd);
            o.finish();
            require(ob.kernel == "gaussian" || ob.kernel == "event" || ob.kernel == "uninformative", o,
                    "kernel", "must be gaussian, event or uninformative");
            require(ob.epsilon > 0.0, o, "epsilon", "must be > 0");
            require(ob.delta > 0.0, o, "delta", "must be > 0");
            require(ob.noise_sd >= 0.0 && std::isfinite(ob.noise_sd), o, "noise_sd", "must be >= 0");
        }
        b.finish();
        require(q.steps >= 1 && q.steps <= 100000, b, "steps", "must lie in [1, 1e5]");
        require(q.grid >= 8 && q.grid <= 4096, b, "grid", "must lie in [8, 4096]");
        const std::size_t dim = cfg.system.kind == "orbit" ? static_cast<std::size_t>(cfg.system.states)
                                                           : q.grid;
        require(q.rank >= 1 && q.rank <= dim, b, "rank", "must lie in [1, state dimension]");
    }

    if (root.has("qcirc")) {
        Block b(root.raw("qcirc"), "qcirc");
        auto& q = cfg.qcirc;
        b.get("q", q.q);
        b.get("t", q.t);
        b.get("x", q.x);
        b.get("observable", q.observable);
        b.get("export_q", q.export_q);
        b.get("shots", q.shots);
        b.finish();
        require(!q.q.empty(), b, "q", "must not be empty");
        for (int r : q.q)
            require(r >= 0 && static_cast<std::size_t>(r + 1) * cfg.dim() <= 12, b, "q",
                    "entries must be >= 0 with at most 12 qubits");
        require(!q.t.empty() && finite_all(q.t), b, "t", "must be a nonempty finite list");
        require(q.x.size() == cfg.dim() && finite_all(q.x), b, "x", "must be a finite point of the torus");
        require(q.observable == "cos" || q.observable == "sin" || q.observable == "one", b,
                "observable", "must be cos, sin or one");
        require(q.export_q == -1 || (q.export_q >= 0 && static_cast<std::size_t>(q.export_q + 1) * cfg.dim() <= 12),
                b, "export_q", "must be -1 or a valid resolution");
        require(q.shots <= 10000000, b, "shots", "must be <= 1e7");
    }

    if (root.has("output")) {
        Block b(root.raw("output"), "output");
        b.get("dir", cfg.output_dir);
        b.finish();
        require(!cfg.output_dir.empty(), b, "dir", "must not be empty");
    }
    root.finish();

    if (cfg.kernel.tau > 0.5 * cfg.fock.sigma)
        throw ConfigError("kernel.tau: must not exceed fock.sigma / 2");
    if (cfg.system.kind == "orbit" && cfg.dim() != 1)
        throw ConfigError("system.alpha: orbit systems are one-dimensional");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("--config: invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
    const auto& s = c.system;
    const auto& k = c.kernel;
    const auto& f = c.fock;
    const auto& q = c.qmda;
    const auto& o = q.observation;
    const auto& r = c.qcirc;
    return json{
        {"schema_version", schema_version},
        {"seed", c.seed},
        {"system", {{"kind", s.kind}, {"alpha", s.alpha}, {"states", s.states}, {"x0", s.x0},
                    {"initial_state", s.initial_state}, {"dt", s.dt}, {"samples", s.samples}}},
        {"kernel", {{"tau", k.tau}, {"p", k.p}, {"dim", c.dim()}, {"bandwidth", k.bandwidth},
                    {"galerkin_bandwidth", k.galerkin_bandwidth}}},
        {"fock", {{"sigma_w", f.sigma_w}, {"p_w", f.p_w}, {"nmax", f.nmax}, {"modes", f.modes},
                  {"sigma", f.sigma}, {"kernel_kappa", f.kernel_kappa}, {"m", f.m}, {"grid", f.grid},
                  {"x", f.x}, {"times", f.times}, {"tn_orders", f.tn_orders},
                  {"tn_kappa", f.tn_kappa}, {"tn_sigma", f.tn_sigma}, {"tn_bandwidth", f.tn_bandwidth}}},
        {"qmda", {{"rank", q.rank}, {"steps", q.steps}, {"grid", q.grid},
                  {"observations_csv", q.observations_csv},
                  {"observation", {{"kernel", o.kernel}, {"epsilon", o.epsilon}, {"delta", o.delta},
                                   {"noise_sd", o.noise_sd}}}}},
        {"qcirc", {{"q", r.q}, {"t", r.t}, {"x", r.x}, {"observable", r.observable},
                   {"export_q", r.export_q}, {"shots", r.shots}}},
        {"output", {{"dir", c.output_dir}}},
    };
}

std::string config_hash(const ExperimentConfig& cfg) {
    auto j = to_json(cfg);
    j.erase("output");
    return csv::hex64(csv::fnv1a64(j.dump()));
}

}  // namespace koopq::cli
