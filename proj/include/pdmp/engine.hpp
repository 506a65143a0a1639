#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pdmp/model.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

enum class Termination { horizon, max_events, extinct };

struct SpikeEvent {
    double t;
    int neuron;
    // True when the firing neuron's potential just before the spike was at
    // most twice the largest outgoing mass. Spikes above that level can
    // only lower the mean.
    bool low;
    // Populated only when state recording was requested.
    std::vector<double> u_pre;
    std::vector<double> u_post;
};

struct Trajectory {
    NetworkParams params;
    PotentialState initial;
    std::vector<SpikeEvent> events;
    PotentialState final_state;
    Termination reason = Termination::horizon;
    // Set when the run ended because the remaining spike probability fell
    // under the extinction threshold.
    std::optional<double> residual_probability;

    std::uint64_t spike_count() const { return events.size(); }
};

struct SimulateOptions {
    double horizon = 0.0;
    std::uint64_t max_events = 10'000'000;
    bool record_states = false;
    // 0 disables extinction detection; otherwise must lie in (0, 1) and
    // requires alpha > 0.
    double extinction_eps = 0.0;
};

Trajectory simulate(const NetworkParams& params, const PotentialState& initial,
                    RngStream& rng, const SimulateOptions& opts);

// First-order reference simulator: explicit Euler steps for the
// relaxation, per-step Bernoulli firing with probability rate * step for
// each neuron, at most one spike per step. Shares no arithmetic with the
// exact path; used to cross-check it.
Trajectory euler_simulate(const NetworkParams& params,
                          const PotentialState& initial, RngStream& rng,
                          double horizon, double step);

// Step suggestion keeping per-step firing probabilities and relaxation
// increments small for the scenario at hand.
double default_euler_step(const NetworkParams& params,
                          const PotentialState& initial);

// State at time t reconstructed by replaying the recorded spikes through
// the exact relaxation and jump maps. t must not precede the initial time;
// times beyond the final state are reached by spike-free relaxation.
PotentialState state_at(const Trajectory& traj, double t);

std::vector<PotentialState> states_at(const Trajectory& traj,
                                      const std::vector<double>& times);

// Largest deviation between recorded pre-spike states and the relaxation
// of their predecessors. Requires a trajectory recorded with state
// snapshots.
double trajectory_consistency_error(const Trajectory& traj);

struct InvariantRow {
    double t;
    std::uint64_t low_count;
    std::uint64_t spike_count;
    // Right-hand side minus left-hand side for each pathwise inequality;
    // all three are non-negative up to rounding on a faithful simulator.
    double slack_mean;
    double slack_count;
    double slack_max;
};

struct InvariantReport {
    std::vector<InvariantRow> rows;
    double min_slack_mean = 0.0;
    double min_slack_count = 0.0;
    double min_slack_max = 0.0;

    bool all_nonnegative(double tol = 1e-9) const {
        return min_slack_mean >= -tol && min_slack_count >= -tol &&
               min_slack_max >= -tol;
    }
};

// Evaluates the three pathwise growth inequalities along the trajectory:
// the mean can rise by at most out_mass_max / n per low spike, the total
// spike count is controlled by the initial mass plus low spikes, and the
// largest potential by (n + 1) times its initial value plus low spikes.
InvariantReport check_pathwise_invariants(const Trajectory& traj);

}  // namespace pdmp
