#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "pdmp/model.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

struct NextSpike {
    double t;
    int neuron;
    std::uint64_t candidates_tried;
};

struct NoSpikeBeforeHorizon {
    PotentialState state_at_horizon;
    std::uint64_t candidates_tried;
};

using ThinningResult = std::variant<NextSpike, NoSpikeBeforeHorizon>;

// Sum of firing rates over all neurons at state s.
double total_rate(const PotentialState& s, const NetworkParams& params);

// Constant rate n * phi(max potential). Along the spike-free relaxation
// every coordinate stays below max(u_i, mean), so this dominates the total
// rate at all later times and never needs refreshing between proposals.
double dominating_rate(const PotentialState& s, const NetworkParams& params);

// Samples the first spike after s.t by thinning a homogeneous proposal
// process at the dominating rate. Accepted proposals carry the firing
// neuron drawn proportionally to the per-neuron rates at the spike time.
ThinningResult next_spike_thinning(const PotentialState& s,
                                   const NetworkParams& params, RngStream& rng,
                                   double horizon);

enum class SurvivalMethod {
    automatic,   // closed form when the shape allows it, else quadrature
    quadrature,  // always integrate numerically (reference path)
};

// Integral of the total rate along the spike-free relaxation over
// [s.t, s.t + dt].
double cumulative_intensity(const PotentialState& s,
                            const NetworkParams& params, double dt,
                            SurvivalMethod method = SurvivalMethod::automatic);

// P(no spike in (s.t, t]) along the spike-free relaxation.
double survival_probability(const PotentialState& s,
                            const NetworkParams& params, double t,
                            SurvivalMethod method = SurvivalMethod::automatic);

// Integral of the total rate over [s.t, infinity). Finite when alpha > 0;
// throws std::domain_error when alpha == 0 and the rate does not vanish.
double total_cumulative_intensity(const PotentialState& s,
                                  const NetworkParams& params);

// First-spike time sampled by inverting the cumulative intensity against a
// unit exponential draw (bracketing plus bisection to 1e-10 in time).
// Empty result means no spike ever occurs on this draw.
std::optional<double> sample_first_spike_inversion(const PotentialState& s,
                                                   const NetworkParams& params,
                                                   RngStream& rng);

// Probability that at least one more spike ever occurs from state s.
// Requires alpha > 0 so that the answer is meaningful.
double residual_spike_probability(const PotentialState& s,
                                  const NetworkParams& params);

}  // namespace pdmp
