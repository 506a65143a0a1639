#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdmp/experiments.hpp"
#include "pdmp/model.hpp"

namespace pdmp {

// Raised by config parsing with a '$.path' prefix locating the offending
// key, so callers can surface exactly where a file went wrong.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Fully resolved run description. The JSON layout is flat: model keys
// (n_neurons, lambda, alpha, weights, phi), run keys (initial, horizon,
// max_events, seed, replicas, checkpoints, record_states, extinction_eps),
// and an optional experiment object. Unknown keys are rejected.
struct RunConfig {
    int n_neurons = 1;
    double lambda = 0.0;
    double alpha = 0.0;
    std::vector<double> weights;  // row-major n*n
    std::string phi_kind = "linear";
    double phi_c = 1.0;
    double phi_p = 1.0;  // power shapes only
    double phi_m = 1.0;  // saturating shapes only
    double phi_r = 1.0;
    bool phi_r_defaulted = false;
    std::vector<double> initial;
    double horizon = 1.0;
    std::uint64_t max_events = 10'000'000;
    std::uint64_t seed = 1;
    std::size_t replicas = 1;
    std::vector<double> checkpoints;
    bool record_states = false;
    double extinction_eps = 0.0;  // 0 disables detection
    nlohmann::json experiment;    // null when absent

    RateFunction make_phi() const;
    NetworkParams make_params() const;
    EnsembleSpec make_ensemble_spec() const;

    // Canonical JSON with every default materialised; parsing it again
    // reproduces the same canonical form byte for byte.
    nlohmann::json to_normalized_json() const;
};

RunConfig parse_config(const std::string& text);
RunConfig parse_config_json(const nlohmann::json& doc);

}  // namespace pdmp
