#include "pdmp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pdmp/sampler.hpp"

namespace pdmp {

namespace {

void validate_inputs(const NetworkParams& params, const PotentialState& initial,
                     const SimulateOptions& opts) {
    validate_state(initial);
    if (static_cast<int>(initial.u.size()) != params.n()) {
        throw std::invalid_argument("initial state size must match network");
    }
    if (!(opts.horizon > initial.t)) {
        throw std::invalid_argument("horizon must lie beyond the start time");
    }
    if (opts.extinction_eps != 0.0) {
        if (!(opts.extinction_eps > 0.0 && opts.extinction_eps < 1.0)) {
            throw std::invalid_argument(
                "extinction threshold must lie in (0, 1), or 0 to disable");
        }
        if (!(params.alpha() > 0.0)) {
            throw std::domain_error(
                "extinction detection requires alpha > 0; with alpha == 0 "
                "activity does not die out in this sense");
        }
    }
}

}  // namespace

Trajectory simulate(const NetworkParams& params, const PotentialState& initial,
                    RngStream& rng, const SimulateOptions& opts) {
    validate_inputs(params, initial, opts);
    const bool detect_extinction = opts.extinction_eps > 0.0;
    const double low_threshold = 2.0 * derived_constants(params).out_mass_max;

    Trajectory traj{params, initial, {}, initial, Termination::horizon, {}};
    PotentialState s = initial;

    if (detect_extinction) {
        double rp = residual_spike_probability(s, params);
        if (rp < opts.extinction_eps) {
            traj.final_state = s;
            traj.reason = Termination::extinct;
            traj.residual_probability = rp;
            return traj;
        }
    }

    for (;;) {
        if (traj.events.size() >= opts.max_events) {
            traj.final_state = s;
            traj.reason = Termination::max_events;
            return traj;
        }
        ThinningResult r = next_spike_thinning(s, params, rng, opts.horizon);
        if (auto* quiet = std::get_if<NoSpikeBeforeHorizon>(&r)) {
            traj.final_state = quiet->state_at_horizon;
            traj.reason = Termination::horizon;
            if (detect_extinction) {
                double rp =
                    residual_spike_probability(quiet->state_at_horizon, params);
                if (rp < opts.extinction_eps) {
                    traj.reason = Termination::extinct;
                    traj.residual_probability = rp;
                }
            }
            return traj;
        }
        const NextSpike& spike = std::get<NextSpike>(r);
        PotentialState pre = flow(s, params, spike.t - s.t);
        PotentialState post = jump(pre, params, spike.neuron);

        SpikeEvent ev;
        ev.t = spike.t;
        ev.neuron = spike.neuron;
        ev.low = pre.u[spike.neuron] <= low_threshold;
        if (opts.record_states) {
            ev.u_pre = pre.u;
            ev.u_post = post.u;
        }
        traj.events.push_back(std::move(ev));
        s = post;

        if (detect_extinction) {
            double rp = residual_spike_probability(s, params);
            if (rp < opts.extinction_eps) {
                traj.final_state = s;
                traj.reason = Termination::extinct;
                traj.residual_probability = rp;
                return traj;
            }
        }
    }
}

Trajectory euler_simulate(const NetworkParams& params,
                          const PotentialState& initial, RngStream& rng,
                          double horizon, double step) {
    validate_state(initial);
    if (static_cast<int>(initial.u.size()) != params.n()) {
        throw std::invalid_argument("initial state size must match network");
    }
    if (!(horizon > initial.t)) {
        throw std::invalid_argument("horizon must lie beyond the start time");
    }
    if (!(step > 0.0)) {
        throw std::invalid_argument("step must be > 0");
    }

    const int n = params.n();
    const double alpha = params.alpha();
    const double lambda = params.lambda();
    const RateFunction& phi = params.phi();
    const double low_threshold = 2.0 * derived_constants(params).out_mass_max;

    Trajectory traj{params, initial, {}, initial, Termination::horizon, {}};
    std::vector<double> u = initial.u;
    std::vector<double> rates(n, 0.0);
    const auto total_steps =
        static_cast<std::uint64_t>(std::ceil((horizon - initial.t) / step));

    for (std::uint64_t k = 0; k < total_steps; ++k) {
        const double t_next =
            std::min(initial.t + static_cast<double>(k + 1) * step, horizon);
        const double h = t_next - (initial.t + static_cast<double>(k) * step);

        int fired = -1;
        double fired_mass = 0.0;
        for (int i = 0; i < n; ++i) {
            rates[i] = phi(u[i]);
            const double p = std::min(1.0, rates[i] * h);
            if (p > 0.0 && rng.uniform01() < p) {
                // keep at most one spike per step, chosen proportionally
                // to the rates among those drawn
                fired_mass += rates[i];
                if (fired < 0 || rng.uniform01() * fired_mass < rates[i]) {
                    fired = i;
                }
            }
        }

        double ubar = 0.0;
        for (int i = 0; i < n; ++i) ubar += u[i];
        ubar /= n;
        for (int i = 0; i < n; ++i) {
            u[i] += h * (-alpha * u[i] - lambda * (u[i] - ubar));
            if (u[i] < 0.0) u[i] = 0.0;
        }

        if (fired >= 0) {
            SpikeEvent ev;
            ev.t = t_next;
            ev.neuron = fired;
            ev.low = u[fired] <= low_threshold;
            ev.u_pre = u;
            for (int j = 0; j < n; ++j) {
                if (j != fired) u[j] += params.weight(fired, j);
            }
            u[fired] = 0.0;
            ev.u_post = u;
            traj.events.push_back(std::move(ev));
            if (traj.events.size() >= 10'000'000) {
                traj.final_state = PotentialState{u, t_next};
                traj.reason = Termination::max_events;
                return traj;
            }
        }
    }
    traj.final_state = PotentialState{u, horizon};
    traj.reason = Termination::horizon;
    return traj;
}

double default_euler_step(const NetworkParams& params,
                          const PotentialState& initial) {
    const double scale = params.alpha() + params.lambda() +
                         dominating_rate(initial, params);
    return 1e-4 * std::min(1.0, scale > 0.0 ? 1.0 / scale : 1.0);
}

PotentialState state_at(const Trajectory& traj, double t) {
    if (!(t >= traj.initial.t)) {
        throw std::invalid_argument("state_at time precedes the trajectory");
    }
    PotentialState s = traj.initial;
    for (const SpikeEvent& ev : traj.events) {
        if (ev.t > t) break;
        s = jump(flow(s, traj.params, ev.t - s.t), traj.params, ev.neuron);
    }
    return flow(s, traj.params, t - s.t);
}

std::vector<PotentialState> states_at(const Trajectory& traj,
                                      const std::vector<double>& times) {
    std::vector<PotentialState> out;
    out.reserve(times.size());
    PotentialState s = traj.initial;
    std::size_t next_event = 0;
    for (double t : times) {
        if (!(t >= traj.initial.t)) {
            throw std::invalid_argument(
                "states_at times must not precede the trajectory");
        }
        while (next_event < traj.events.size() &&
               traj.events[next_event].t <= t) {
            const SpikeEvent& ev = traj.events[next_event];
            s = jump(flow(s, traj.params, ev.t - s.t), traj.params, ev.neuron);
            ++next_event;
        }
        out.push_back(flow(s, traj.params, t - s.t));
    }
    return out;
}

double trajectory_consistency_error(const Trajectory& traj) {
    double worst = 0.0;
    PotentialState s = traj.initial;
    for (const SpikeEvent& ev : traj.events) {
        if (ev.u_pre.empty() || ev.u_post.empty()) {
            throw std::invalid_argument(
                "consistency check needs a trajectory recorded with states");
        }
        PotentialState pre = flow(s, traj.params, ev.t - s.t);
        for (int i = 0; i < traj.params.n(); ++i) {
            worst = std::max(worst, std::fabs(pre.u[i] - ev.u_pre[i]));
        }
        s = PotentialState{ev.u_post, ev.t};
    }
    return worst;
}

InvariantReport check_pathwise_invariants(const Trajectory& traj) {
    const NetworkParams& params = traj.params;
    const int n = params.n();
    const double mass = derived_constants(params).out_mass_max;
    const double mean0 = traj.initial.mean();
    const double max0 = traj.initial.max();

    InvariantReport report;
    bool first = true;
    std::uint64_t low = 0;
    std::uint64_t count = 0;

    auto add_row = [&](double t, const PotentialState& state) {
        InvariantRow row;
        row.t = t;
        row.low_count = low;
        row.spike_count = count;
        const double kd = static_cast<double>(low);
        const double nd = static_cast<double>(count);
        row.slack_mean = mean0 + mass * kd / n - state.mean();
        row.slack_count = n * mean0 + 2.0 * mass * kd - mass * nd;
        row.slack_max = (n + 1) * max0 + 2.0 * mass * kd - state.max();
        if (first) {
            report.min_slack_mean = row.slack_mean;
            report.min_slack_count = row.slack_count;
            report.min_slack_max = row.slack_max;
            first = false;
        } else {
            report.min_slack_mean =
                std::min(report.min_slack_mean, row.slack_mean);
            report.min_slack_count =
                std::min(report.min_slack_count, row.slack_count);
            report.min_slack_max = std::min(report.min_slack_max, row.slack_max);
        }
        report.rows.push_back(row);
    };

    PotentialState s = traj.initial;
    add_row(traj.initial.t, traj.initial);
    for (const SpikeEvent& ev : traj.events) {
        PotentialState post =
            ev.u_post.empty()
                ? jump(flow(s, params, ev.t - s.t), params, ev.neuron)
                : PotentialState{ev.u_post, ev.t};
        low += ev.low ? 1 : 0;
        ++count;
        add_row(ev.t, post);
        s = post;
    }
    add_row(traj.final_state.t, traj.final_state);
    return report;
}

}  // namespace pdmp
