#include "pdmp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "pdmp/config.hpp"
#include "pdmp/engine.hpp"
#include "pdmp/experiments.hpp"
#include "pdmp/io.hpp"
#include "pdmp/sampler.hpp"
#include "pdmp/stats.hpp"

namespace pdmp {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string format = "jsonl";
    std::optional<std::uint64_t> seed_override;
    std::optional<std::uint64_t> replicas_override;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "path to the JSON config")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--format", args.format, "event log format")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    cmd->add_option("--seed", args.seed_override, "override the config seed");
    cmd->add_option("--replicas", args.replicas_override,
                    "override the config replica count");
    cmd->add_option("--threads", args.threads,
                    "worker threads (0 = hardware width)");
}

RunConfig load_config(const CommonArgs& args) {
    std::ifstream in(args.config_path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read config file: " +
                                 args.config_path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig cfg = parse_config(buf.str());
    if (args.seed_override) cfg.seed = *args.seed_override;
    if (args.replicas_override) {
        if (*args.replicas_override == 0) {
            throw ConfigError("--replicas: must be >= 1");
        }
        cfg.replicas = static_cast<std::size_t>(*args.replicas_override);
    }
    return cfg;
}

fs::path prepare_out_dir(const CommonArgs& args, const RunConfig& cfg) {
    fs::path dir(args.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory " +
                                 dir.string() + ": " + ec.message());
    }
    write_text_file(dir / "normalized-config.json",
                    cfg.to_normalized_json().dump(2) + "\n");
    return dir;
}

std::string require_experiment(const RunConfig& cfg, const std::string& name) {
    if (cfg.experiment.is_null()) return name;
    const std::string given = cfg.experiment["name"].get<std::string>();
    if (given != name) {
        throw ConfigError("$.experiment.name: config declares '" + given +
                          "' but the subcommand runs '" + name + "'");
    }
    return name;
}

int cmd_simulate(const CommonArgs& args) {
    RunConfig cfg = load_config(args);
    fs::path dir = prepare_out_dir(args, cfg);

    NetworkParams params = cfg.make_params();
    RngStream rng(cfg.seed, 0);
    SimulateOptions opts;
    opts.horizon = cfg.horizon;
    opts.max_events = cfg.max_events;
    opts.record_states = cfg.record_states;
    opts.extinction_eps = cfg.extinction_eps;
    Trajectory traj =
        simulate(params, PotentialState{cfg.initial, 0.0}, rng, opts);

    if (args.format == "jsonl") {
        write_text_file(dir / "events.jsonl",
                        events_to_jsonl(traj, cfg.seed));
    } else {
        write_text_file(dir / "events.csv", events_to_csv(traj, cfg.seed));
    }

    std::uint64_t low = 0;
    for (const SpikeEvent& ev : traj.events) low += ev.low ? 1 : 0;
    const char* reason = traj.reason == Termination::horizon ? "horizon"
                         : traj.reason == Termination::max_events
                             ? "max_events"
                             : "extinct";
    CsvWriter w(cfg.seed, {"reason", "n_events", "n_low", "t_final",
                           "ubar_final", "umax_final",
                           "residual_probability"});
    w.add_row({reason, cell(traj.spike_count()), cell(low),
               cell(traj.final_state.t), cell(traj.final_state.mean()),
               cell(traj.final_state.max()),
               traj.residual_probability
                   ? cell(*traj.residual_probability)
                   : std::string("")});
    w.write_file(dir / "summary.csv");
    std::cout << "simulate: " << traj.spike_count() << " events, reason "
              << reason << "\n";
    return 0;
}

int cmd_ensemble(const CommonArgs& args) {
    RunConfig cfg = load_config(args);
    fs::path dir = prepare_out_dir(args, cfg);
    EnsembleSpec spec = cfg.make_ensemble_spec();
    spec.parallelism = args.threads;
    EnsembleSummary sum = run_ensemble(spec);

    CsvWriter w(cfg.seed, {"t", "mean_ubar", "ci_lo", "ci_hi"});
    for (const CheckpointStat& cs : sum.checkpoint_stats) {
        w.add_row({cell(cs.t), cell(cs.mean_ubar), cell(cs.ci_lo),
                   cell(cs.ci_hi)});
    }
    w.write_file(dir / "summary.csv");

    CsvWriter hist(cfg.seed, {"spike_count", "replicas"});
    for (const auto& [count, reps] : sum.spike_count_histogram) {
        hist.add_row({cell(count), cell(reps)});
    }
    hist.write_file(dir / "spike_counts.csv");
    std::cout << "ensemble: " << sum.replicas << " replicas, extinct fraction "
              << format_double(sum.extinction_fraction) << "\n";
    return 0;
}

int cmd_theorem2(const CommonArgs& args) {
    RunConfig cfg = load_config(args);
    require_experiment(cfg, "theorem2");
    fs::path dir = prepare_out_dir(args, cfg);
    EnsembleSpec spec = cfg.make_ensemble_spec();
    spec.parallelism = args.threads;
    MeanBoundReport report = check_mean_bound(spec);

    CsvWriter w(cfg.seed, {"t", "mean_ubar", "ci_lo", "ci_hi", "bound"});
    for (const MeanBoundRow& row : report.rows) {
        w.add_row({cell(row.t), cell(row.mean_ubar), cell(row.ci_lo),
                   cell(row.ci_hi), cell(row.bound)});
    }
    w.write_file(dir / "theorem2.csv");
    std::cout << "mean-decay check: "
              << (report.any_violation ? "VIOLATION FLAGGED" : "within bound")
              << "\n";
    return report.any_violation ? 2 : 0;
}

int cmd_extinction(const CommonArgs& args) {
    RunConfig cfg = load_config(args);
    require_experiment(cfg, "extinction");
    std::vector<double> horizons;
    if (!cfg.experiment.is_null() && cfg.experiment.contains("horizons")) {
        for (const auto& h : cfg.experiment["horizons"]) {
            horizons.push_back(h.get<double>());
        }
    } else {
        horizons = {cfg.horizon};
    }
    fs::path dir = prepare_out_dir(args, cfg);
    EnsembleSpec spec = cfg.make_ensemble_spec();
    spec.parallelism = args.threads;
    ExtinctionReport report = check_extinction(spec, horizons);

    CsvWriter w(cfg.seed, {"horizon", "extinct_frac", "max_final_potential",
                           "p99_spike_count"});
    for (const ExtinctionRow& row : report.rows) {
        w.add_row({cell(row.horizon), cell(row.extinct_fraction),
                   cell(row.max_final_potential), cell(row.p99_spike_count)});
    }
    w.write_file(dir / "extinction.csv");
    std::cout << "extinction check: fraction "
              << format_double(report.fraction_at_largest)
              << " at the largest horizon"
              << (report.monotone ? "" : " (NOT monotone)") << "\n";
    return report.monotone ? 0 : 2;
}

int cmd_ergodicity(const CommonArgs& args) {
    RunConfig cfg = load_config(args);
    require_experiment(cfg, "ergodicity");
    if (cfg.experiment.is_null()) {
        throw ConfigError(
            "$.experiment: the ergodicity check needs an experiment block "
            "with initial_b");
    }
    fs::path dir = prepare_out_dir(args, cfg);

    EnsembleSpec spec_a = cfg.make_ensemble_spec();
    spec_a.parallelism = args.threads;
    EnsembleSpec spec_b = spec_a;
    {
        NetworkParams params = cfg.make_params();
        const auto& jb = cfg.experiment["initial_b"];
        if (jb.is_string()) {
            spec_b.initial =
                resolve_initial_preset(jb.get<std::string>(), params);
        } else {
            if (!jb.is_array() ||
                static_cast<int>(jb.size()) != params.n()) {
                throw ConfigError(
                    "$.experiment.initial_b: expected an array matching the "
                    "network size or a preset string");
            }
            spec_b.initial.clear();
            for (std::size_t i = 0; i < jb.size(); ++i) {
                double x = jb[i].get<double>();
                if (!(x >= 0.0) || !std::isfinite(x)) {
                    throw ConfigError("$.experiment.initial_b[" +
                                      std::to_string(i) +
                                      "]: must be finite and >= 0");
                }
                spec_b.initial.push_back(x);
            }
        }
        // second ensemble draws from disjoint streams
        spec_b.seed = cfg.seed + 1;
    }

    ErgodicityOptions opts;
    if (!cfg.experiment.is_null()) {
        if (cfg.experiment.contains("burnin")) {
            opts.burnin = cfg.experiment["burnin"].get<double>();
        }
        if (cfg.experiment.contains("gap")) {
            opts.gap = cfg.experiment["gap"].get<double>();
        }
        if (cfg.experiment.contains("samples_per_replica")) {
            opts.samples_per_replica =
                cfg.experiment["samples_per_replica"].get<std::size_t>();
        }
    }
    ErgodicityReport report = check_ergodicity(spec_a, spec_b, opts);

    CsvWriter w(cfg.seed, {"neuron", "w1_cross", "w1_self"});
    for (const ErgodicityRow& row : report.rows) {
        w.add_row({row.label, cell(row.w1_cross), cell(row.w1_self)});
    }
    w.write_file(dir / "ergodicity.csv");
    std::cout << "two-start comparison: "
              << (report.all_converged ? "distributions agree"
                                       : "DIVERGENCE FLAGGED")
              << "\n";
    return report.all_converged ? 0 : 2;
}

int cmd_bounds(const CommonArgs& args) {
    RunConfig cfg = load_config(args);
    require_experiment(cfg, "bounds");
    fs::path dir = prepare_out_dir(args, cfg);
    EnsembleSpec spec = cfg.make_ensemble_spec();
    spec.parallelism = args.threads;

    BoundParams bp;
    bp.r = cfg.phi_r;
    if (!cfg.experiment.is_null()) {
        if (cfg.experiment.contains("r")) {
            bp.r = cfg.experiment["r"].get<double>();
        }
        if (cfg.experiment.contains("theta")) {
            bp.theta = cfg.experiment["theta"].get<double>();
        }
    }
    BoundsReport report = check_spike_time_bounds(spec, bp);

    CsvWriter w(cfg.seed, {"name", "estimate", "ci", "bound_corrected",
                           "bound_printed"});
    w.add_row({report.name, cell(report.estimate), cell(report.sigma3),
               cell(report.bound_corrected), cell(report.bound_printed)});
    w.write_file(dir / "bounds.csv");
    std::cout << "first-spike bound (" << report.name << "): "
              << (report.violated ? "VIOLATION FLAGGED" : "within bound")
              << "\n";
    return report.violated ? 2 : 0;
}

int cmd_regen(const CommonArgs& args) {
    RunConfig cfg = load_config(args);
    require_experiment(cfg, "regen");
    if (cfg.experiment.is_null()) {
        throw ConfigError(
            "$.experiment: the regeneration diagnostic needs an experiment "
            "block with epsilon (and delta when alpha == 0)");
    }
    fs::path dir = prepare_out_dir(args, cfg);
    EnsembleSpec spec = cfg.make_ensemble_spec();
    spec.parallelism = args.threads;

    RegenerationSpec rs;
    rs.epsilon = cfg.experiment["epsilon"].get<double>();
    if (cfg.experiment.contains("delta")) {
        rs.delta = cfg.experiment["delta"].get<double>();
    }
    if (cfg.experiment.contains("windows")) {
        rs.windows = cfg.experiment["windows"].get<std::size_t>();
    }
    RegenerationReport report = regeneration_diagnostics(spec, rs);

    CsvWriter w(cfg.seed, {"key", "value"});
    w.add_row({"slot_period", cell(report.slot_period)});
    w.add_row({"windows_total", cell(static_cast<std::uint64_t>(
                                    report.windows_total))});
    w.add_row({"pattern_windows", cell(static_cast<std::uint64_t>(
                                      report.pattern_windows))});
    w.add_row({"pattern_fraction", cell(report.pattern_fraction)});
    w.add_row({"returns", cell(static_cast<std::uint64_t>(report.returns))});
    w.add_row({"mean_return_time", cell(report.mean_return_time)});
    w.add_row({"median_return_time", cell(report.median_return_time)});
    w.add_row({"uses_ball", report.uses_ball ? "true" : "false"});
    w.write_file(dir / "regen.csv");
    std::cout << "regeneration diagnostic: pattern fraction "
              << format_double(report.pattern_fraction) << ", "
              << report.returns << " returns\n";
    return 0;
}

int cmd_validate_sampler(const CommonArgs& args) {
    RunConfig cfg = load_config(args);
    require_experiment(cfg, "validate-sampler");
    fs::path dir = prepare_out_dir(args, cfg);

    std::size_t samples = 10000;
    if (!cfg.experiment.is_null() && cfg.experiment.contains("samples")) {
        samples = cfg.experiment["samples"].get<std::size_t>();
    }
    NetworkParams params = cfg.make_params();
    PotentialState init{cfg.initial, 0.0};
    const double horizon = cfg.horizon;

    std::vector<double> thin;
    thin.reserve(samples);
    RngStream rng_t(cfg.seed, 0);
    for (std::size_t k = 0; k < samples; ++k) {
        ThinningResult r = next_spike_thinning(init, params, rng_t, horizon);
        if (auto* spike = std::get_if<NextSpike>(&r)) thin.push_back(spike->t);
    }
    std::vector<double> inv;
    inv.reserve(samples);
    RngStream rng_i(cfg.seed, 1);
    for (std::size_t k = 0; k < samples; ++k) {
        auto t = sample_first_spike_inversion(init, params, rng_i);
        if (t && *t <= horizon) inv.push_back(*t);
    }
    if (thin.size() < 100 || inv.size() < 100) {
        throw std::runtime_error(
            "too few spikes before the horizon to validate the sampler; "
            "raise the horizon or the rate");
    }
    std::sort(thin.begin(), thin.end());
    std::sort(inv.begin(), inv.end());

    const double mass =
        1.0 - survival_probability(init, params, horizon,
                                   SurvivalMethod::quadrature);
    auto cond_cdf = [&](double t) {
        return (1.0 -
                survival_probability(init, params, t,
                                     SurvivalMethod::quadrature)) /
               mass;
    };
    const double d1 = ks_statistic(thin, cond_cdf);
    const double p1 = ks_pvalue(d1, thin.size());
    const double d2 = ks_statistic_two_sample(thin, inv);
    const double p2 = ks_pvalue_two_sample(d2, thin.size(), inv.size());

    CsvWriter w(cfg.seed, {"name", "ks_stat", "p_value", "n"});
    w.add_row({"thinning_vs_survival", cell(d1), cell(p1),
               cell(static_cast<std::uint64_t>(thin.size()))});
    w.add_row({"thinning_vs_inversion", cell(d2), cell(p2),
               cell(static_cast<std::uint64_t>(inv.size()))});
    w.write_file(dir / "sampler.csv");

    const bool ok = p1 > 0.01 && p2 > 0.01;
    std::cout << "sampler validation: "
              << (ok ? "distributions agree" : "MISMATCH FLAGGED") << "\n";
    return ok ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"event-driven simulator for mean-coupled spiking networks",
                 "pdmpsim"};
    app.require_subcommand(1);

    CommonArgs common;
    struct Entry {
        const char* name;
        const char* help;
        int (*fn)(const CommonArgs&);
    };
    const Entry entries[] = {
        {"simulate", "run one trajectory and write its event log",
         cmd_simulate},
        {"ensemble", "run independent replicas and aggregate them",
         cmd_ensemble},
        {"check-theorem2", "compare the mean against its decay envelope",
         cmd_theorem2},
        {"check-extinction", "measure how often activity dies out",
         cmd_extinction},
        {"check-ergodicity",
         "compare long-run marginals from two start states", cmd_ergodicity},
        {"check-bounds", "compare first-spike probabilities against bounds",
         cmd_bounds},
        {"regen-diagnostics", "cascade and return-time diagnostics",
         cmd_regen},
        {"validate-sampler",
         "KS tests of the spike sampler against reference distributions",
         cmd_validate_sampler},
    };
    int (*selected)(const CommonArgs&) = nullptr;
    for (const Entry& e : entries) {
        CLI::App* cmd = app.add_subcommand(e.name, e.help);
        add_common(cmd, common);
        cmd->callback([&selected, fn = e.fn]() { selected = fn; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        app.exit(e);
        return 1;
    }

    try {
        return selected(common);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "unsupported regime: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace pdmp
