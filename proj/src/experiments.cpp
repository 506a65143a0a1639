#include "pdmp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "pdmp/sampler.hpp"

namespace pdmp {

namespace {

struct ReplicaRecord {
    std::vector<double> checkpoint_ubar;
    std::vector<std::vector<double>> checkpoint_u;  // [checkpoint][neuron]
    std::uint64_t spikes = 0;
    bool extinct = false;
    bool truncated = false;
    double final_max = 0.0;
};

void run_indexed(std::size_t count, unsigned parallelism,
                 const std::function<void(std::size_t)>& body) {
    unsigned width = parallelism == 0
                         ? std::max(1u, std::thread::hardware_concurrency())
                         : parallelism;
    width = static_cast<unsigned>(
        std::min<std::size_t>(width, std::max<std::size_t>(count, 1)));
    if (width <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    pool.reserve(width);
    for (unsigned w = 0; w < width; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < count; ++i) {
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const std::exception& e) {
                throw std::runtime_error("replica " + std::to_string(i) +
                                         " failed: " + e.what());
            }
        }
    }
}

void validate_spec(const EnsembleSpec& spec) {
    if (static_cast<int>(spec.initial.size()) != spec.params.n()) {
        throw std::invalid_argument(
            "ensemble initial state size must match the network");
    }
    if (spec.replicas == 0) {
        throw std::invalid_argument("ensemble needs at least one replica");
    }
    if (!(spec.horizon > 0.0)) {
        throw std::invalid_argument("ensemble horizon must be > 0");
    }
    double prev = 0.0;
    for (double c : spec.checkpoints) {
        if (!(c >= 0.0 && c <= spec.horizon)) {
            throw std::invalid_argument(
                "checkpoints must lie within [0, horizon]");
        }
        if (c < prev) {
            throw std::invalid_argument("checkpoints must be non-decreasing");
        }
        prev = c;
    }
}

}  // namespace

std::vector<double> resolve_initial_preset(const std::string& preset,
                                           const NetworkParams& params) {
    const int n = params.n();
    if (preset == "zero") {
        return std::vector<double>(n, 0.0);
    }
    if (preset == "cascade_v0") {
        return cascade_configs(params).v[0];
    }
    const std::string uniform_tag = "uniform:";
    if (preset.rfind(uniform_tag, 0) == 0) {
        const std::string num = preset.substr(uniform_tag.size());
        std::size_t used = 0;
        double level = 0.0;
        try {
            level = std::stod(num, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad uniform level in preset '" +
                                        preset + "'");
        }
        if (used != num.size() || !(level >= 0.0) || !std::isfinite(level)) {
            throw std::invalid_argument("bad uniform level in preset '" +
                                        preset + "'");
        }
        return std::vector<double>(n, level);
    }
    throw std::invalid_argument("unknown initial preset '" + preset +
                                "'; expected zero, uniform:<x>, or "
                                "cascade_v0");
}

EnsembleSummary run_ensemble(const EnsembleSpec& spec) {
    validate_spec(spec);
    const std::size_t reps = spec.replicas;
    const int n = spec.params.n();
    std::vector<ReplicaRecord> records(reps);

    run_indexed(reps, spec.parallelism, [&](std::size_t k) {
        RngStream rng(spec.seed, k);
        SimulateOptions opts;
        opts.horizon = spec.horizon;
        opts.max_events = spec.max_events;
        opts.extinction_eps = spec.extinction_eps;
        PotentialState init{spec.initial, 0.0};
        Trajectory traj = simulate(spec.params, init, rng, opts);

        ReplicaRecord rec;
        rec.spikes = traj.spike_count();
        rec.extinct = traj.reason == Termination::extinct;
        rec.truncated = traj.reason == Termination::max_events;
        rec.final_max = traj.final_state.max();
        if (!spec.checkpoints.empty()) {
            auto states = states_at(traj, spec.checkpoints);
            rec.checkpoint_ubar.reserve(states.size());
            rec.checkpoint_u.reserve(states.size());
            for (const auto& st : states) {
                rec.checkpoint_ubar.push_back(st.mean());
                rec.checkpoint_u.push_back(st.u);
            }
        }
        records[k] = std::move(rec);
    });

    EnsembleSummary sum;
    sum.seed = spec.seed;
    sum.replicas = reps;
    sum.horizon = spec.horizon;
    const std::size_t ncp = spec.checkpoints.size();
    sum.checkpoint_stats.resize(ncp);
    sum.marginals.assign(
        ncp, std::vector<std::vector<double>>(
                 n, std::vector<double>(reps, 0.0)));
    sum.ubar_samples.assign(ncp, std::vector<double>(reps, 0.0));

    std::size_t extinct = 0;
    for (std::size_t k = 0; k < reps; ++k) {
        const ReplicaRecord& rec = records[k];
        if (rec.extinct) ++extinct;
        if (rec.truncated) ++sum.truncated_replicas;
        sum.max_final_potential = std::max(sum.max_final_potential,
                                           rec.final_max);
        ++sum.spike_count_histogram[rec.spikes];
        for (std::size_t c = 0; c < ncp; ++c) {
            sum.ubar_samples[c][k] = rec.checkpoint_ubar[c];
            for (int i = 0; i < n; ++i) {
                sum.marginals[c][i][k] = rec.checkpoint_u[c][i];
            }
        }
    }
    sum.extinction_fraction =
        static_cast<double>(extinct) / static_cast<double>(reps);
    for (std::size_t c = 0; c < ncp; ++c) {
        MeanCi ci = mean_ci95(sum.ubar_samples[c]);
        sum.checkpoint_stats[c] =
            CheckpointStat{spec.checkpoints[c], ci.mean, ci.lo, ci.hi};
    }
    return sum;
}

MeanBoundReport check_mean_bound(const EnsembleSpec& spec) {
    const auto lip = spec.params.phi().lipschitz_constant();
    if (!lip) {
        throw std::domain_error(
            "mean-decay check needs a Lipschitz rate shape (linear, "
            "saturating, or power with exponent 1)");
    }
    if (spec.checkpoints.empty()) {
        throw std::invalid_argument("mean-decay check needs checkpoints");
    }
    const double growth =
        derived_constants(spec.params).in_mass_max * *lip - spec.params.alpha();
    const double mean0 = [&] {
        PotentialState s{spec.initial, 0.0};
        return s.mean();
    }();

    MeanBoundReport report;
    report.summary = run_ensemble(spec);
    for (const CheckpointStat& cs : report.summary.checkpoint_stats) {
        MeanBoundRow row;
        row.t = cs.t;
        row.mean_ubar = cs.mean_ubar;
        row.ci_lo = cs.ci_lo;
        row.ci_hi = cs.ci_hi;
        row.bound = mean0 * std::exp(cs.t * growth);
        row.violated = cs.ci_lo > row.bound;
        report.any_violation = report.any_violation || row.violated;
        report.rows.push_back(row);
        report.summary.bound_violations.push_back(row.violated);
    }
    return report;
}

ExtinctionReport check_extinction(const EnsembleSpec& spec,
                                  const std::vector<double>& horizons) {
    if (!(spec.params.alpha() > 0.0)) {
        throw std::domain_error("extinction check requires alpha > 0");
    }
    const double in_mass = derived_constants(spec.params).in_mass_max;
    if (!(spec.params.phi().radius() > in_mass)) {
        throw std::invalid_argument(
            "extinction check requires the rate radius to exceed the "
            "largest column sum of the weight matrix");
    }
    if (horizons.empty()) {
        throw std::invalid_argument("extinction check needs horizons");
    }
    std::vector<double> sorted = horizons;
    std::sort(sorted.begin(), sorted.end());

    ExtinctionReport report;
    double prev_frac = -1.0;
    for (double h : sorted) {
        EnsembleSpec one = spec;
        one.horizon = h;
        one.checkpoints.clear();
        if (one.extinction_eps == 0.0) one.extinction_eps = 1e-9;
        EnsembleSummary sum = run_ensemble(one);

        std::vector<double> counts;
        counts.reserve(sum.replicas);
        for (const auto& [count, times] : sum.spike_count_histogram) {
            for (std::uint64_t k = 0; k < times; ++k) {
                counts.push_back(static_cast<double>(count));
            }
        }
        std::sort(counts.begin(), counts.end());

        ExtinctionRow row;
        row.horizon = h;
        row.extinct_fraction = sum.extinction_fraction;
        row.max_final_potential = sum.max_final_potential;
        row.p99_spike_count = quantile_sorted(counts, 0.99);
        report.rows.push_back(row);
        if (row.extinct_fraction < prev_frac) report.monotone = false;
        prev_frac = row.extinct_fraction;
        if (h == sorted.back()) {
            report.fraction_at_largest = row.extinct_fraction;
            report.spike_count_histogram = sum.spike_count_histogram;
        }
    }
    return report;
}

ErgodicityReport check_ergodicity(const EnsembleSpec& spec_a,
                                  const EnsembleSpec& spec_b,
                                  const ErgodicityOptions& opts) {
    if (spec_a.params.alpha() != 0.0 || spec_b.params.alpha() != 0.0) {
        throw std::domain_error(
            "the two-start comparison is meaningful only for alpha == 0");
    }
    if (spec_a.params.n() != spec_b.params.n()) {
        throw std::invalid_argument("both ensembles need the same network");
    }
    auto nonzero = [](const std::vector<double>& u) {
        for (double x : u) {
            if (x != 0.0) return true;
        }
        return false;
    };
    if (!nonzero(spec_a.initial) || !nonzero(spec_b.initial)) {
        throw std::invalid_argument(
            "both start states must be nonzero; the zero state is absorbing");
    }
    if (!(opts.burnin >= 0.0) || !(opts.gap > 0.0) ||
        opts.samples_per_replica == 0) {
        throw std::invalid_argument("bad burn-in, gap, or sample count");
    }

    std::vector<double> grid;
    grid.reserve(opts.samples_per_replica);
    for (std::size_t k = 1; k <= opts.samples_per_replica; ++k) {
        grid.push_back(opts.burnin + static_cast<double>(k) * opts.gap);
    }

    auto run_one = [&](const EnsembleSpec& base) {
        EnsembleSpec s = base;
        s.checkpoints = grid;
        s.horizon = grid.back();
        s.extinction_eps = 0.0;
        return run_ensemble(s);
    };
    EnsembleSummary sa = run_one(spec_a);
    EnsembleSummary sb = run_one(spec_b);

    const int n = spec_a.params.n();
    const std::size_t reps = sa.replicas;
    const std::size_t half = reps / 2;
    if (half == 0) {
        throw std::invalid_argument(
            "self-distance baseline needs at least two replicas");
    }

    auto pool = [&](const EnsembleSummary& sum, int neuron, std::size_t k_lo,
                    std::size_t k_hi) {
        std::vector<double> xs;
        xs.reserve((k_hi - k_lo) * sum.ubar_samples.size());
        for (std::size_t c = 0; c < sum.ubar_samples.size(); ++c) {
            for (std::size_t k = k_lo; k < k_hi; ++k) {
                xs.push_back(neuron < 0 ? sum.ubar_samples[c][k]
                                        : sum.marginals[c][neuron][k]);
            }
        }
        return xs;
    };

    ErgodicityReport report;
    report.all_converged = true;
    for (int i = -1; i < n; ++i) {
        const double cross =
            wasserstein1(pool(sa, i, 0, reps), pool(sb, i, 0, reps));
        const double self =
            wasserstein1(pool(sa, i, 0, half), pool(sa, i, half, reps));
        ErgodicityRow row;
        row.label = i < 0 ? "ubar" : std::to_string(i);
        row.w1_cross = cross;
        row.w1_self = self;
        row.converged = cross <= 2.0 * self;
        report.all_converged = report.all_converged && row.converged;
        report.rows.push_back(row);
    }
    return report;
}

BoundsReport check_spike_time_bounds(const EnsembleSpec& spec,
                                     const BoundParams& bp) {
    if (!(bp.r > 0.0)) {
        throw std::invalid_argument("bound radius must be > 0");
    }
    const PotentialState init{spec.initial, 0.0};
    validate_state(init);
    const double umax = init.max();
    const NetworkParams& params = spec.params;
    const RateFunction phi = params.phi().with_radius(bp.r);

    BoundsReport report;
    if (umax < bp.r) {
        // Low-start regime: estimate P(no spike ever).
        if (!(params.alpha() > 0.0)) {
            throw std::domain_error(
                "the no-spike-ever bound needs alpha > 0");
        }
        const double integral = phi.integrability_value();
        report.name = "no_spike_ever";
        report.bound_corrected =
            std::exp(-params.n() / params.alpha() * integral);
        report.bound_printed =
            std::exp(-static_cast<double>(params.n()) * params.alpha() *
                     integral);

        std::vector<std::uint8_t> quiet(spec.replicas, 0);
        std::vector<std::uint8_t> unresolved(spec.replicas, 0);
        run_indexed(spec.replicas, spec.parallelism, [&](std::size_t k) {
            RngStream rng(spec.seed, k);
            SimulateOptions opts;
            opts.horizon = spec.horizon;
            opts.max_events = spec.max_events;
            opts.extinction_eps =
                spec.extinction_eps > 0.0 ? spec.extinction_eps : 1e-9;
            Trajectory traj = simulate(params, init, rng, opts);
            if (traj.reason == Termination::extinct &&
                traj.spike_count() == 0) {
                quiet[k] = 1;
            } else if (traj.reason == Termination::horizon &&
                       traj.spike_count() == 0) {
                unresolved[k] = 1;  // counted as spiking; keep the estimate
                                    // conservative
            }
        });
        std::size_t hits = 0;
        for (std::size_t k = 0; k < spec.replicas; ++k) {
            hits += quiet[k];
            report.unresolved += unresolved[k];
        }
        const double n = static_cast<double>(spec.replicas);
        report.estimate = static_cast<double>(hits) / n;
        report.sigma3 =
            3.0 * std::sqrt(report.estimate * (1.0 - report.estimate) / n);
        report.violated = report.estimate + report.sigma3 < report.bound_corrected;
        report.violated_printed =
            report.estimate + report.sigma3 < report.bound_printed;
        return report;
    }
    if (umax > bp.r) {
        // High-start regime: estimate P(first spike later than theta).
        const double relax = params.alpha() + params.lambda();
        if (!(bp.theta > 0.0) || !(bp.theta * relax < 1.0)) {
            throw std::invalid_argument(
                "theta must lie in (0, 1/(alpha + lambda))");
        }
        report.name = "first_spike_after_theta";
        report.beta = bp.r * (1.0 - relax * bp.theta);
        const double bound = std::exp(-bp.theta * phi(report.beta));
        report.bound_corrected = bound;
        report.bound_printed = bound;

        std::vector<std::uint8_t> late(spec.replicas, 0);
        run_indexed(spec.replicas, spec.parallelism, [&](std::size_t k) {
            RngStream rng(spec.seed, k);
            ThinningResult r =
                next_spike_thinning(init, params, rng, init.t + bp.theta);
            if (std::holds_alternative<NoSpikeBeforeHorizon>(r)) late[k] = 1;
        });
        std::size_t hits = 0;
        for (std::size_t k = 0; k < spec.replicas; ++k) hits += late[k];
        const double n = static_cast<double>(spec.replicas);
        report.estimate = static_cast<double>(hits) / n;
        report.sigma3 =
            3.0 * std::sqrt(report.estimate * (1.0 - report.estimate) / n);
        report.violated = report.estimate > bound + report.sigma3;
        report.violated_printed = report.violated;
        return report;
    }
    throw std::invalid_argument(
        "the start state sits exactly on the radius; neither bound applies");
}

RegenerationReport regeneration_diagnostics(const EnsembleSpec& spec,
                                            const RegenerationSpec& rs) {
    const NetworkParams& params = spec.params;
    const int n = params.n();
    if (!(rs.epsilon > 0.0)) {
        throw std::invalid_argument("window width epsilon must be > 0");
    }
    if (rs.windows == 0) {
        throw std::invalid_argument("need at least one window");
    }
    const bool uses_ball = params.alpha() == 0.0;
    CascadeConfig cc = cascade_configs(params);
    const std::vector<double>& v0 = cc.v[0];
    if (uses_ball) {
        double min_pos = 0.0;
        bool any = false;
        for (double x : v0) {
            if (x > 0.0) {
                min_pos = any ? std::min(min_pos, x) : x;
                any = true;
            }
        }
        if (!any) {
            throw std::invalid_argument(
                "base configuration is all zero; the ball constraint is "
                "unsatisfiable");
        }
        if (!(rs.delta > 0.0 && rs.delta < min_pos)) {
            throw std::invalid_argument(
                "delta must lie in (0, smallest positive coordinate of the "
                "base configuration)");
        }
    }

    const double period = n * rs.epsilon;
    const double horizon = period * static_cast<double>(rs.windows);

    RegenerationReport report;
    report.slot_period = period;
    report.uses_ball = uses_ball;

    std::vector<std::vector<double>> replica_gaps(spec.replicas);
    std::vector<std::size_t> replica_patterns(spec.replicas, 0);
    std::vector<std::size_t> replica_windows(spec.replicas, 0);

    run_indexed(spec.replicas, spec.parallelism, [&](std::size_t rep) {
        RngStream rng(spec.seed, rep);
        SimulateOptions opts;
        opts.horizon = horizon;
        opts.max_events = spec.max_events;
        opts.extinction_eps = 0.0;
        PotentialState init{spec.initial, 0.0};
        Trajectory traj = simulate(params, init, rng, opts);

        std::vector<double> grid;
        grid.reserve(rs.windows);
        for (std::size_t k = 1; k <= rs.windows; ++k) {
            grid.push_back(period * static_cast<double>(k));
        }
        auto states = states_at(traj, grid);

        double last_hit = -1.0;
        for (std::size_t k = 0; k < states.size(); ++k) {
            bool in_set;
            if (uses_ball) {
                in_set = true;
                for (int i = 0; i < n; ++i) {
                    if (std::fabs(states[k].u[i] - v0[i]) >= rs.delta) {
                        in_set = false;
                        break;
                    }
                }
            } else {
                in_set = states[k].max() <= params.phi().radius();
            }
            if (in_set) {
                const double t = grid[k];
                if (last_hit >= 0.0) {
                    replica_gaps[rep].push_back(t - last_hit);
                }
                last_hit = t;
            }
        }

        // Window pattern: exactly n spikes, neuron m in slot m.
        std::size_t ev = 0;
        for (std::size_t w = 0; w < rs.windows; ++w) {
            const double w_lo = period * static_cast<double>(w);
            const double w_hi = w_lo + period;
            while (ev < traj.events.size() && traj.events[ev].t <= w_lo) ++ev;
            std::size_t ev_end = ev;
            while (ev_end < traj.events.size() &&
                   traj.events[ev_end].t <= w_hi) {
                ++ev_end;
            }
            ++replica_windows[rep];
            if (ev_end - ev == static_cast<std::size_t>(n)) {
                bool match = true;
                for (int m = 0; m < n; ++m) {
                    const SpikeEvent& e = traj.events[ev + m];
                    const double rel = e.t - w_lo;
                    if (e.neuron != m || rel <= m * rs.epsilon ||
                        rel >= (m + 1) * rs.epsilon) {
                        match = false;
                        break;
                    }
                }
                if (match) ++replica_patterns[rep];
            }
            ev = ev_end;
        }
    });

    std::vector<double> gaps;
    for (std::size_t rep = 0; rep < spec.replicas; ++rep) {
        report.windows_total += replica_windows[rep];
        report.pattern_windows += replica_patterns[rep];
        gaps.insert(gaps.end(), replica_gaps[rep].begin(),
                    replica_gaps[rep].end());
    }
    report.pattern_fraction =
        report.windows_total == 0
            ? 0.0
            : static_cast<double>(report.pattern_windows) /
                  static_cast<double>(report.windows_total);
    report.returns = gaps.size();
    if (!gaps.empty()) {
        double acc = 0.0;
        for (double g : gaps) acc += g;
        report.mean_return_time = acc / static_cast<double>(gaps.size());
        std::sort(gaps.begin(), gaps.end());
        report.median_return_time = quantile_sorted(gaps, 0.5);
    }
    return report;
}

}  // namespace pdmp
