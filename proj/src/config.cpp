#include "pdmp/config.hpp"

#include <cmath>
#include <set>

namespace pdmp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

double require_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double require_nonneg(const json& j, const std::string& path) {
    double x = require_number(j, path);
    if (!std::isfinite(x) || x < 0.0) fail(path, "must be finite and >= 0");
    return x;
}

std::uint64_t require_count(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
        auto v = j.get<std::int64_t>();
        if (v < 0) fail(path, "must be >= 0");
        return static_cast<std::uint64_t>(v);
    }
    if (j.is_number_float()) {
        double x = j.get<double>();
        if (!std::isfinite(x) || x < 0.0 || x != std::floor(x) ||
            x > 1.8e19) {
            fail(path, "must be a non-negative integer");
        }
        return static_cast<std::uint64_t>(x);
    }
    fail(path, "must be a non-negative integer");
}

bool require_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& prefix) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key)) fail(prefix + "." + key, "unknown key");
    }
}

std::vector<double> parse_weights(const json& j, int n,
                                  const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        fail(path, "expected an array of " + std::to_string(n) + " rows");
    }
    std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const json& row = j[i];
        const std::string rpath = path + "[" + std::to_string(i) + "]";
        if (!row.is_array() || static_cast<int>(row.size()) != n) {
            fail(rpath, "expected a row of " + std::to_string(n) + " numbers");
        }
        for (int k = 0; k < n; ++k) {
            const std::string cpath = rpath + "[" + std::to_string(k) + "]";
            double x = require_nonneg(row[k], cpath);
            if (i == k && x != 0.0) {
                fail(cpath, "diagonal weights must be 0 (no self-coupling)");
            }
            w[static_cast<std::size_t>(i) * n + k] = x;
        }
    }
    return w;
}

void parse_phi(const json& j, RunConfig& cfg) {
    if (!j.is_object()) fail("$.phi", "expected an object");
    reject_unknown(j, {"kind", "c", "p", "M", "r"}, "$.phi");
    if (!j.contains("kind")) fail("$.phi.kind", "required");
    if (!j["kind"].is_string()) fail("$.phi.kind", "expected a string");
    cfg.phi_kind = j["kind"].get<std::string>();
    if (cfg.phi_kind != "linear" && cfg.phi_kind != "power" &&
        cfg.phi_kind != "saturating") {
        fail("$.phi.kind", "must be linear, power, or saturating");
    }
    if (!j.contains("c")) fail("$.phi.c", "required");
    cfg.phi_c = require_nonneg(j["c"], "$.phi.c");

    if (cfg.phi_kind == "power") {
        if (!j.contains("p")) fail("$.phi.p", "required for power shapes");
        cfg.phi_p = require_number(j["p"], "$.phi.p");
        if (!std::isfinite(cfg.phi_p) || cfg.phi_p <= 0.0) {
            fail("$.phi.p",
                 "must be > 0; otherwise the integral of phi(u)/u near zero "
                 "diverges");
        }
    } else if (j.contains("p")) {
        fail("$.phi.p", "only valid for power shapes");
    }

    if (cfg.phi_kind == "saturating") {
        if (!j.contains("M")) fail("$.phi.M", "required for saturating shapes");
        cfg.phi_m = require_number(j["M"], "$.phi.M");
        if (!std::isfinite(cfg.phi_m) || cfg.phi_m <= 0.0) {
            fail("$.phi.M", "must be finite and > 0");
        }
    } else if (j.contains("M")) {
        fail("$.phi.M", "only valid for saturating shapes");
    }

    if (j.contains("r")) {
        cfg.phi_r = require_number(j["r"], "$.phi.r");
        if (!std::isfinite(cfg.phi_r) || cfg.phi_r <= 0.0) {
            fail("$.phi.r", "must be finite and > 0");
        }
        cfg.phi_r_defaulted = false;
    } else {
        cfg.phi_r_defaulted = true;  // resolved after weights are known
    }
}

std::vector<double> parse_initial(const json& j, const NetworkParams& params,
                                  const std::string& path) {
    if (j.is_string()) {
        try {
            return resolve_initial_preset(j.get<std::string>(), params);
        } catch (const std::invalid_argument& e) {
            fail(path, e.what());
        }
    }
    if (!j.is_array()) {
        fail(path, "expected an array of potentials or a preset string");
    }
    if (static_cast<int>(j.size()) != params.n()) {
        fail(path, "expected " + std::to_string(params.n()) + " entries");
    }
    std::vector<double> u(j.size(), 0.0);
    for (std::size_t i = 0; i < j.size(); ++i) {
        u[i] = require_nonneg(j[i], path + "[" + std::to_string(i) + "]");
    }
    return u;
}

void parse_experiment(const json& j, RunConfig& cfg) {
    if (!j.is_object()) fail("$.experiment", "expected an object");
    if (!j.contains("name")) fail("$.experiment.name", "required");
    if (!j["name"].is_string()) {
        fail("$.experiment.name", "expected a string");
    }
    const std::string name = j["name"].get<std::string>();
    const std::string prefix = "$.experiment";
    if (name == "theorem2") {
        reject_unknown(j, {"name"}, prefix);
    } else if (name == "extinction") {
        reject_unknown(j, {"name", "horizons"}, prefix);
        if (!j.contains("horizons")) {
            fail(prefix + ".horizons", "required");
        }
        if (!j["horizons"].is_array() || j["horizons"].empty()) {
            fail(prefix + ".horizons", "expected a non-empty array");
        }
        for (std::size_t i = 0; i < j["horizons"].size(); ++i) {
            double h = require_number(
                j["horizons"][i],
                prefix + ".horizons[" + std::to_string(i) + "]");
            if (!(h > 0.0)) {
                fail(prefix + ".horizons[" + std::to_string(i) + "]",
                     "must be > 0");
            }
        }
    } else if (name == "ergodicity") {
        reject_unknown(j,
                       {"name", "initial_b", "burnin", "gap",
                        "samples_per_replica"},
                       prefix);
        if (!j.contains("initial_b")) fail(prefix + ".initial_b", "required");
        if (j.contains("burnin")) {
            require_nonneg(j["burnin"], prefix + ".burnin");
        }
        if (j.contains("gap")) {
            double g = require_number(j["gap"], prefix + ".gap");
            if (!(g > 0.0)) fail(prefix + ".gap", "must be > 0");
        }
        if (j.contains("samples_per_replica")) {
            if (require_count(j["samples_per_replica"],
                              prefix + ".samples_per_replica") == 0) {
                fail(prefix + ".samples_per_replica", "must be >= 1");
            }
        }
    } else if (name == "bounds") {
        reject_unknown(j, {"name", "r", "theta"}, prefix);
        if (j.contains("r")) {
            double r = require_number(j["r"], prefix + ".r");
            if (!(r > 0.0)) fail(prefix + ".r", "must be > 0");
        }
        if (j.contains("theta")) {
            double th = require_number(j["theta"], prefix + ".theta");
            if (!(th > 0.0)) fail(prefix + ".theta", "must be > 0");
        }
    } else if (name == "regen") {
        reject_unknown(j, {"name", "delta", "epsilon", "windows"}, prefix);
        if (!j.contains("epsilon")) fail(prefix + ".epsilon", "required");
        double eps = require_number(j["epsilon"], prefix + ".epsilon");
        if (!(eps > 0.0)) fail(prefix + ".epsilon", "must be > 0");
        if (j.contains("delta")) {
            double d = require_number(j["delta"], prefix + ".delta");
            if (!(d > 0.0)) fail(prefix + ".delta", "must be > 0");
        }
        if (j.contains("windows")) {
            if (require_count(j["windows"], prefix + ".windows") == 0) {
                fail(prefix + ".windows", "must be >= 1");
            }
        }
    } else if (name == "validate-sampler") {
        reject_unknown(j, {"name", "samples"}, prefix);
        if (j.contains("samples")) {
            if (require_count(j["samples"], prefix + ".samples") == 0) {
                fail(prefix + ".samples", "must be >= 1");
            }
        }
    } else {
        fail(prefix + ".name",
             "unknown experiment '" + name +
                 "'; expected theorem2, extinction, ergodicity, bounds, "
                 "regen, or validate-sampler");
    }
    cfg.experiment = j;
}

}  // namespace

RateFunction RunConfig::make_phi() const {
    if (phi_kind == "linear") return RateFunction::linear(phi_c, phi_r);
    if (phi_kind == "power") return RateFunction::power(phi_c, phi_p, phi_r);
    return RateFunction::saturating(phi_c, phi_m, phi_r);
}

NetworkParams RunConfig::make_params() const {
    return NetworkParams(n_neurons, weights, lambda, alpha, make_phi());
}

EnsembleSpec RunConfig::make_ensemble_spec() const {
    EnsembleSpec spec{make_params(), initial};
    spec.horizon = horizon;
    spec.seed = seed;
    spec.replicas = replicas;
    spec.checkpoints = checkpoints;
    spec.max_events = max_events;
    spec.extinction_eps = extinction_eps;
    return spec;
}

nlohmann::json RunConfig::to_normalized_json() const {
    json phi{{"kind", phi_kind}, {"c", phi_c}, {"r", phi_r}};
    if (phi_kind == "power") phi["p"] = phi_p;
    if (phi_kind == "saturating") phi["M"] = phi_m;

    json w = json::array();
    for (int i = 0; i < n_neurons; ++i) {
        json row = json::array();
        for (int k = 0; k < n_neurons; ++k) {
            row.push_back(weights[static_cast<std::size_t>(i) * n_neurons + k]);
        }
        w.push_back(row);
    }

    json doc{{"n_neurons", n_neurons},
             {"lambda", lambda},
             {"alpha", alpha},
             {"weights", w},
             {"phi", phi},
             {"initial", initial},
             {"horizon", horizon},
             {"max_events", max_events},
             {"seed", seed},
             {"replicas", replicas},
             {"checkpoints", checkpoints},
             {"record_states", record_states},
             {"extinction_eps", extinction_eps}};
    if (!experiment.is_null()) doc["experiment"] = experiment;
    return doc;
}

RunConfig parse_config_json(const nlohmann::json& doc) {
    if (!doc.is_object()) fail("$", "config must be a JSON object");
    reject_unknown(doc,
                   {"n_neurons", "lambda", "alpha", "weights", "phi",
                    "initial", "horizon", "max_events", "seed", "replicas",
                    "checkpoints", "record_states", "extinction_eps",
                    "experiment"},
                   "$");
    for (const char* key : {"n_neurons", "lambda", "alpha", "weights", "phi",
                            "initial", "horizon", "seed"}) {
        if (!doc.contains(key)) fail(std::string("$.") + key, "required");
    }

    RunConfig cfg;
    std::uint64_t n_raw = require_count(doc["n_neurons"], "$.n_neurons");
    if (n_raw == 0 || n_raw > 100000) {
        fail("$.n_neurons", "must lie in [1, 100000]");
    }
    cfg.n_neurons = static_cast<int>(n_raw);
    cfg.lambda = require_nonneg(doc["lambda"], "$.lambda");
    cfg.alpha = require_nonneg(doc["alpha"], "$.alpha");
    cfg.weights = parse_weights(doc["weights"], cfg.n_neurons, "$.weights");
    parse_phi(doc["phi"], cfg);

    cfg.horizon = require_number(doc["horizon"], "$.horizon");
    if (!std::isfinite(cfg.horizon) || cfg.horizon <= 0.0) {
        fail("$.horizon", "must be finite and > 0");
    }
    cfg.seed = require_count(doc["seed"], "$.seed");
    if (doc.contains("max_events")) {
        cfg.max_events = require_count(doc["max_events"], "$.max_events");
    }
    if (doc.contains("replicas")) {
        std::uint64_t r = require_count(doc["replicas"], "$.replicas");
        if (r == 0) fail("$.replicas", "must be >= 1");
        cfg.replicas = static_cast<std::size_t>(r);
    }
    if (doc.contains("record_states")) {
        cfg.record_states = require_bool(doc["record_states"],
                                         "$.record_states");
    }
    if (doc.contains("checkpoints")) {
        if (!doc["checkpoints"].is_array()) {
            fail("$.checkpoints", "expected an array");
        }
        double prev = 0.0;
        for (std::size_t i = 0; i < doc["checkpoints"].size(); ++i) {
            const std::string path =
                "$.checkpoints[" + std::to_string(i) + "]";
            double c = require_nonneg(doc["checkpoints"][i], path);
            if (c > cfg.horizon) fail(path, "must not exceed horizon");
            if (c < prev) fail(path, "checkpoints must be non-decreasing");
            cfg.checkpoints.push_back(c);
            prev = c;
        }
    }
    if (doc.contains("extinction_eps")) {
        double e = require_number(doc["extinction_eps"], "$.extinction_eps");
        if (!(e >= 0.0 && e < 1.0)) {
            fail("$.extinction_eps", "must lie in [0, 1); 0 disables");
        }
        if (e > 0.0 && cfg.alpha == 0.0) {
            fail("$.extinction_eps",
                 "extinction detection requires alpha > 0");
        }
        cfg.extinction_eps = e;
    } else {
        cfg.extinction_eps = cfg.alpha > 0.0 ? 1e-9 : 0.0;
    }

    // Construct the validated objects once so every cross-field constraint
    // is enforced with config context.
    if (cfg.phi_r_defaulted) {
        NetworkParams probe(cfg.n_neurons, cfg.weights, cfg.lambda, cfg.alpha,
                            RateFunction::linear(0.0, 1.0));
        cfg.phi_r = default_rate_radius(probe);
    }
    NetworkParams params = [&] {
        try {
            return cfg.make_params();
        } catch (const std::invalid_argument& e) {
            fail("$", e.what());
        }
    }();
    cfg.initial = parse_initial(doc["initial"], params, "$.initial");

    if (doc.contains("experiment") && !doc["experiment"].is_null()) {
        parse_experiment(doc["experiment"], cfg);
    }
    return cfg;
}

RunConfig parse_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") +
                          e.what());
    }
    return parse_config_json(doc);
}

}  // namespace pdmp
