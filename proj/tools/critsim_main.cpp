// Batch front end: simulate ensembles, calibrate detection thresholds,
// run the full evaluation protocol, and detect criticality in ingested traces.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "crit/io.hpp"

namespace fs = std::filesystem;
using namespace crit;

namespace {

std::string join_argv(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "master seed override");
}

ExperimentConfig load_config(const CommonOpts& opts) {
    ExperimentConfig config = opts.config_path.empty()
                                  ? io::parse_config_text("{}", "<defaults>")
                                  : io::parse_config(opts.config_path);
    if (opts.seed) config.master_seed = *opts.seed;
    return config;
}

DynamicsParams simulate_dynamics(const ExperimentConfig& config, int n_override) {
    DynamicsParams params = config.dynamics;
    if (n_override > 0 && n_override != params.n_benchmarks) {
        params.n_benchmarks = n_override;
        params.weights.assign(static_cast<std::size_t>(n_override), 1.0);
        // Volatility factors drawn as the eval harness does for repetition 0.
        RandomStream rng(repetition_seed(config.master_seed, n_override, 0,
                                         "volatility"));
        params.agent_volatility_factors.resize(static_cast<std::size_t>(n_override));
        for (double& f : params.agent_volatility_factors) f = rng.uniform(0.0, 1.0);
    }
    params.validate();
    return params;
}

int cmd_simulate(const CommonOpts& opts, int runs, int n_override,
                 int steps_override, const std::string& command_line) {
    ExperimentConfig config = load_config(opts);
    if (steps_override > 0) config.steps = steps_override;
    const DynamicsParams params = simulate_dynamics(config, n_override);

    const Ensemble ensemble = run_ensemble(params, runs, config.steps,
                                           config.master_seed, config.threads);
    fs::create_directories(opts.out_dir);
    const fs::path traces = fs::path(opts.out_dir) / "traces.csv";
    io::export_traces_csv(ensemble, traces);

    int critical = 0;
    for (const SimulationTrace& tr : ensemble.traces) {
        if (tr.critical_index) ++critical;
    }
    std::cout << "wrote " << traces.string() << " (" << runs << " runs, "
              << critical << " reached criticality)\n";

    io::RunManifest manifest;
    manifest.command_line = command_line;
    manifest.master_seed = config.master_seed;
    manifest.files = {traces, io::complexity_companion_path(traces)};
    io::write_manifest(manifest, fs::path(opts.out_dir) / "manifest.json");
    return 0;
}

int cmd_optimize(const CommonOpts& opts, int n, const std::string& command_line) {
    ExperimentConfig config = load_config(opts);
    const RepetitionResult rep = run_repetition(n, config, 0);

    fs::create_directories(opts.out_dir);
    const fs::path out = fs::path(opts.out_dir) / "optimizer.json";
    std::string json = "{\n";
    json += "  \"n_benchmarks\": " + std::to_string(n) + ",\n";
    json += "  \"theta_star\": " + io::format_double(rep.theta_star) + ",\n";
    json += "  \"train_accuracy\": " + io::format_double(rep.train_accuracy) + ",\n";
    json += "  \"iterations\": " + std::to_string(rep.optimizer_iterations) + ",\n";
    json += std::string("  \"converged\": ") +
            (rep.optimizer_converged ? "true" : "false") + "\n";
    json += "}\n";
    io::atomic_write(out, json);
    std::cout << "theta_star " << io::format_double(rep.theta_star)
              << " train_accuracy " << io::format_double(rep.train_accuracy) << "\n";

    io::RunManifest manifest;
    manifest.command_line = command_line;
    manifest.master_seed = config.master_seed;
    manifest.files = {out};
    io::write_manifest(manifest, fs::path(opts.out_dir) / "manifest.json");
    return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& command_line) {
    ExperimentConfig config = load_config(opts);
    const EvaluationReport report = run_experiment(config);

    fs::create_directories(opts.out_dir);
    const fs::path out_dir(opts.out_dir);
    const fs::path report_path = out_dir / "report.json";
    io::write_report(report, report_path);

    io::RunManifest manifest;
    manifest.command_line = command_line;
    manifest.master_seed = config.master_seed;
    manifest.config_echo = io::config_to_json_text(config);
    manifest.files.push_back(report_path);

    // Aligned figure data from repetition 0's regenerated test ensemble.
    for (std::size_t i = 0; i < config.benchmark_counts.size(); ++i) {
        const int n = config.benchmark_counts[i];
        DynamicsParams params = config.dynamics;
        params.n_benchmarks = n;
        params.weights.assign(static_cast<std::size_t>(n), 1.0);
        RandomStream vf_rng(repetition_seed(config.master_seed, n, 0, "volatility"));
        params.agent_volatility_factors.resize(static_cast<std::size_t>(n));
        for (double& f : params.agent_volatility_factors) {
            f = vf_rng.uniform(0.0, 1.0);
        }
        const Ensemble test =
            run_ensemble(params, config.test_runs, config.steps,
                         repetition_seed(config.master_seed, n, 0, "test"),
                         config.threads);
        try {
            const AlignedEnsemble aligned = align_ensemble(test);
            const double theta =
                report.configurations[i].repetitions.front().theta_star;
            const std::string suffix = "_n" + std::to_string(n);
            io::emit_aligned_plot_data(aligned, config.statistic, theta, out_dir,
                                       suffix);
            manifest.files.push_back(out_dir / ("fig1" + suffix + ".csv"));
            manifest.files.push_back(out_dir / ("fig2" + suffix + ".csv"));
            manifest.files.push_back(out_dir / ("fig3" + suffix + ".csv"));
            manifest.files.push_back(out_dir / ("fig3" + suffix + "_meta.csv"));
        } catch (const std::runtime_error&) {
            std::cout << "n=" << n
                      << ": no run reached criticality, aligned figures skipped\n";
        }
    }
    io::emit_histogram_plot_data(report, out_dir);
    for (const ConfigurationReport& conf : report.configurations) {
        manifest.files.push_back(
            out_dir / ("fig4_n" + std::to_string(conf.n_benchmarks) + ".csv"));
    }
    io::write_plot_schema(out_dir);
    manifest.files.push_back(out_dir / "plot_schema.txt");
    io::write_manifest(manifest, out_dir / "manifest.json");

    for (const ConfigurationReport& conf : report.configurations) {
        char line[160];
        std::snprintf(line, sizeof(line),
                      "n=%d train %.1f +- %.1f test %.1f +- %.1f",
                      conf.n_benchmarks, 100.0 * conf.train_mean,
                      100.0 * conf.train_sd, 100.0 * conf.test_mean,
                      100.0 * conf.test_sd);
        std::cout << line << "\n";
    }
    std::cout << "wrote " << report_path.string() << "\n";
    return 0;
}

int cmd_detect(const CommonOpts& opts, const std::string& input, double theta) {
    ExperimentConfig config = load_config(opts);
    DetectorConfig detector = config.detector;
    detector.theta = theta;

    const std::vector<SimulationTrace> traces = io::ingest_trace_csv(input);
    for (const SimulationTrace& tr : traces) {
        const DerivativeSeries deriv =
            sd_derivative(detection_sd_series(tr, config.statistic));
        const auto d = detect_critical_time(deriv, detector);
        if (d) {
            std::cout << "run " << tr.run_id << ": criticality detected at t=" << *d
                      << "\n";
        } else {
            std::cout << "run " << tr.run_id << ": no detection\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"criticality simulation and detection toolkit"};
    app.require_subcommand(1);
    const std::string command_line = join_argv(argc, argv);

    CommonOpts sim_opts, opt_opts, eval_opts, det_opts;
    int sim_runs = 100, sim_n = 0, sim_steps = 0;
    int opt_n = 20;
    std::string det_input;
    double det_theta = 0.0;

    CLI::App* simulate = app.add_subcommand("simulate", "run a seeded ensemble "
                                                        "and export trace CSVs");
    add_common(simulate, sim_opts);
    simulate->add_option("--runs", sim_runs, "number of simulation runs");
    simulate->add_option("--n", sim_n, "benchmark count override");
    simulate->add_option("--steps", sim_steps, "horizon override");

    CLI::App* optimize = app.add_subcommand(
        "optimize", "calibrate the detection threshold on a training ensemble");
    add_common(optimize, opt_opts);
    optimize->add_option("--n", opt_n, "benchmark count");

    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "full train/test experiment with report and plot data");
    add_common(evaluate, eval_opts);

    CLI::App* detect = app.add_subcommand(
        "detect", "run the detector on an ingested trace CSV");
    add_common(detect, det_opts);
    detect->add_option("--input", det_input, "trace CSV (run_id,t,agent_id,performance)")
        ->required();
    detect->add_option("--theta", det_theta, "detection threshold")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return cmd_simulate(sim_opts, sim_runs, sim_n, sim_steps, command_line);
        }
        if (optimize->parsed()) return cmd_optimize(opt_opts, opt_n, command_line);
        if (evaluate->parsed()) return cmd_evaluate(eval_opts, command_line);
        if (detect->parsed()) return cmd_detect(det_opts, det_input, det_theta);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
