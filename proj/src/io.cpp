#include "crit/io.hpp"

#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace crit::io {

using ordered_json = nlohmann::ordered_json;

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string fnv1a64_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

[[noreturn]] void config_error(const std::string& origin, const std::string& msg) {
    throw std::runtime_error(origin + ": " + msg);
}

void reject_unknown(const ordered_json& obj, const std::string& prefix,
                    std::initializer_list<const char*> allowed,
                    const std::string& origin) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) config_error(origin, "unknown key '" + prefix + it.key() + "'");
    }
}

template <typename T>
void read_field(const ordered_json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

ordered_json config_to_json(const ExperimentConfig& c) {
    ordered_json dyn;
    dyn["n_benchmarks"] = c.dynamics.n_benchmarks;
    dyn["weights"] = c.dynamics.weights;
    dyn["c_max"] = c.dynamics.c_max;
    dyn["sigma_base"] = c.dynamics.sigma_base;
    dyn["mu_gain_min"] = c.dynamics.mu_gain_min;
    dyn["mu_gain_max"] = c.dynamics.mu_gain_max;
    dyn["sigma_var"] = c.dynamics.sigma_var;
    dyn["volatility_mode"] =
        c.dynamics.volatility_mode == VolatilityMode::framework ? "framework"
                                                                : "experiment";
    dyn["agent_volatility_factors"] = c.dynamics.agent_volatility_factors;
    dyn["init_min"] = c.dynamics.init_min;
    dyn["init_max"] = c.dynamics.init_max;

    ordered_json det;
    det["burn_in"] = c.detector.burn_in;
    det["window"] = c.detector.window;

    ordered_json opt;
    opt["learning_rate"] = c.optimizer.learning_rate;
    opt["tolerance"] = c.optimizer.tolerance;
    opt["max_iterations"] = c.optimizer.max_iterations;
    opt["epsilon"] = c.optimizer.epsilon;
    opt["grid_count"] = c.optimizer.grid_count;

    ordered_json exp;
    exp["benchmark_counts"] = c.benchmark_counts;
    exp["train_runs"] = c.train_runs;
    exp["test_runs"] = c.test_runs;
    exp["repetitions"] = c.repetitions;
    exp["steps"] = c.steps;
    exp["master_seed"] = c.master_seed;
    exp["sd_statistic"] = sd_statistic_name(c.statistic);
    // threads is an execution knob, not part of the result, so it is not
    // echoed: reports must be byte-identical across thread counts.

    ordered_json root;
    root["dynamics"] = std::move(dyn);
    root["detector"] = std::move(det);
    root["optimizer"] = std::move(opt);
    root["experiment"] = std::move(exp);
    return root;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
    ordered_json root;
    try {
        root = ordered_json::parse(text);
    } catch (const std::exception& e) {
        config_error(origin, std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) config_error(origin, "top level must be an object");
    reject_unknown(root, "", {"dynamics", "detector", "optimizer", "experiment"},
                   origin);

    ExperimentConfig config;
    try {
        if (root.contains("dynamics")) {
            const ordered_json& dyn = root.at("dynamics");
            reject_unknown(dyn, "dynamics.",
                           {"n_benchmarks", "weights", "c_max", "sigma_base",
                            "mu_gain_min", "mu_gain_max", "sigma_var",
                            "volatility_mode", "agent_volatility_factors",
                            "init_min", "init_max"},
                           origin);
            DynamicsParams& d = config.dynamics;
            bool n_given = dyn.contains("n_benchmarks");
            read_field(dyn, "n_benchmarks", d.n_benchmarks);
            read_field(dyn, "c_max", d.c_max);
            read_field(dyn, "sigma_base", d.sigma_base);
            read_field(dyn, "mu_gain_min", d.mu_gain_min);
            read_field(dyn, "mu_gain_max", d.mu_gain_max);
            read_field(dyn, "sigma_var", d.sigma_var);
            read_field(dyn, "init_min", d.init_min);
            read_field(dyn, "init_max", d.init_max);
            if (dyn.contains("volatility_mode")) {
                const std::string mode = dyn.at("volatility_mode").get<std::string>();
                if (mode == "framework") {
                    d.volatility_mode = VolatilityMode::framework;
                } else if (mode == "experiment") {
                    d.volatility_mode = VolatilityMode::experiment;
                } else {
                    config_error(origin, "dynamics.volatility_mode must be "
                                         "'framework' or 'experiment'");
                }
            }
            if (dyn.contains("weights") || dyn.contains("agent_volatility_factors")) {
                if (!n_given) {
                    config_error(origin, "dynamics.weights/agent_volatility_factors "
                                         "require dynamics.n_benchmarks");
                }
            }
            if (n_given) {
                const auto n = static_cast<std::size_t>(d.n_benchmarks);
                d.weights.assign(n, 1.0);
                d.agent_volatility_factors.assign(n, 1.0);
                read_field(dyn, "weights", d.weights);
                read_field(dyn, "agent_volatility_factors",
                           d.agent_volatility_factors);
            }
        }
        if (root.contains("detector")) {
            const ordered_json& det = root.at("detector");
            reject_unknown(det, "detector.", {"burn_in", "window"}, origin);
            read_field(det, "burn_in", config.detector.burn_in);
            read_field(det, "window", config.detector.window);
        }
        if (root.contains("optimizer")) {
            const ordered_json& opt = root.at("optimizer");
            reject_unknown(opt, "optimizer.",
                           {"learning_rate", "tolerance", "max_iterations",
                            "epsilon", "grid_count"},
                           origin);
            read_field(opt, "learning_rate", config.optimizer.learning_rate);
            read_field(opt, "tolerance", config.optimizer.tolerance);
            read_field(opt, "max_iterations", config.optimizer.max_iterations);
            read_field(opt, "epsilon", config.optimizer.epsilon);
            read_field(opt, "grid_count", config.optimizer.grid_count);
        }
        if (root.contains("experiment")) {
            const ordered_json& exp = root.at("experiment");
            reject_unknown(exp, "experiment.",
                           {"benchmark_counts", "train_runs", "test_runs",
                            "repetitions", "steps", "master_seed", "sd_statistic",
                            "threads"},
                           origin);
            read_field(exp, "benchmark_counts", config.benchmark_counts);
            read_field(exp, "train_runs", config.train_runs);
            read_field(exp, "test_runs", config.test_runs);
            read_field(exp, "repetitions", config.repetitions);
            read_field(exp, "steps", config.steps);
            read_field(exp, "master_seed", config.master_seed);
            read_field(exp, "threads", config.threads);
            if (exp.contains("sd_statistic")) {
                config.statistic =
                    sd_statistic_from_name(exp.at("sd_statistic").get<std::string>());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        config_error(origin, e.what());
    }

    try {
        config.validate();
        config.dynamics.validate();
        if (config.detector.burn_in < 0) {
            throw std::invalid_argument("detector.burn_in must be >= 0");
        }
        if (config.detector.window < 1) {
            throw std::invalid_argument("detector.window must be >= 1");
        }
        if (!(config.optimizer.epsilon > 0.0)) {
            throw std::invalid_argument("optimizer.epsilon must be > 0");
        }
        if (config.optimizer.max_iterations < 1 || config.optimizer.grid_count < 2) {
            throw std::invalid_argument(
                "optimizer.max_iterations >= 1 and grid_count >= 2 required");
        }
    } catch (const std::invalid_argument& e) {
        config_error(origin, e.what());
    }
    return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

std::filesystem::path complexity_companion_path(const std::filesystem::path& path) {
    std::filesystem::path companion = path;
    companion.replace_filename(path.stem().string() + "_complexity" +
                               path.extension().string());
    return companion;
}

void export_traces_csv(const Ensemble& ensemble, const std::filesystem::path& path) {
    std::string perf = "run_id,t,agent_id,performance\n";
    std::string comp = "run_id,t,complexity\n";
    for (const SimulationTrace& tr : ensemble.traces) {
        for (std::size_t t = 0; t < tr.performances.size(); ++t) {
            for (std::size_t i = 0; i < tr.performances[t].size(); ++i) {
                perf += std::to_string(tr.run_id);
                perf += ',';
                perf += std::to_string(t);
                perf += ',';
                perf += std::to_string(i);
                perf += ',';
                perf += format_double(tr.performances[t][i]);
                perf += '\n';
            }
            comp += std::to_string(tr.run_id);
            comp += ',';
            comp += std::to_string(t);
            comp += ',';
            comp += format_double(tr.complexity[t]);
            comp += '\n';
        }
    }
    atomic_write(path, perf);
    atomic_write(complexity_companion_path(path), comp);
}

namespace {

[[noreturn]] void csv_error(const std::filesystem::path& path, std::size_t line,
                            const std::string& msg) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + msg);
}

} // namespace

std::vector<SimulationTrace> ingest_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace CSV: " + path.string());

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) csv_error(path, 1, "empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "run_id,t,agent_id,performance") {
        csv_error(path, lineno,
                  "bad header, expected 'run_id,t,agent_id,performance'");
    }

    struct Row {
        long run, t, agent;
        double perf;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Row row{};
        char* end = nullptr;
        const char* s = line.c_str();
        row.run = std::strtol(s, &end, 10);
        if (end == s || *end != ',') csv_error(path, lineno, "malformed run_id");
        s = end + 1;
        row.t = std::strtol(s, &end, 10);
        if (end == s || *end != ',') csv_error(path, lineno, "malformed t");
        s = end + 1;
        row.agent = std::strtol(s, &end, 10);
        if (end == s || *end != ',') csv_error(path, lineno, "malformed agent_id");
        s = end + 1;
        row.perf = std::strtod(s, &end);
        if (end == s || *end != '\0') csv_error(path, lineno, "malformed performance");
        if (!(row.perf >= 0.0 && row.perf <= 1.0)) {
            csv_error(path, lineno, "performance outside [0, 1]");
        }
        if (row.t < 0 || row.agent < 0) {
            csv_error(path, lineno, "negative time step or agent id");
        }
        rows.push_back(row);
    }
    if (rows.empty()) csv_error(path, lineno, "no data rows");

    // Group by run in order of first appearance.
    std::vector<long> run_order;
    for (const Row& r : rows) {
        bool seen = false;
        for (long id : run_order) {
            if (id == r.run) {
                seen = true;
                break;
            }
        }
        if (!seen) run_order.push_back(r.run);
    }

    std::vector<SimulationTrace> traces;
    for (long id : run_order) {
        long max_t = -1, max_agent = -1;
        for (const Row& r : rows) {
            if (r.run != id) continue;
            max_t = std::max(max_t, r.t);
            max_agent = std::max(max_agent, r.agent);
        }
        const auto steps1 = static_cast<std::size_t>(max_t) + 1;
        const auto n = static_cast<std::size_t>(max_agent) + 1;
        std::vector<std::vector<double>> matrix(
            steps1, std::vector<double>(n, -1.0)); // -1 marks missing cells
        for (const Row& r : rows) {
            if (r.run != id) continue;
            double& cell = matrix[static_cast<std::size_t>(r.t)]
                                 [static_cast<std::size_t>(r.agent)];
            if (cell >= 0.0) {
                throw std::runtime_error(path.string() + ": duplicate cell run " +
                                         std::to_string(id) + " t " +
                                         std::to_string(r.t) + " agent " +
                                         std::to_string(r.agent));
            }
            cell = r.perf;
        }
        for (std::size_t t = 0; t < steps1; ++t) {
            for (std::size_t i = 0; i < n; ++i) {
                if (matrix[t][i] < 0.0) {
                    throw std::runtime_error(
                        path.string() + ": run " + std::to_string(id) +
                        " is missing t=" + std::to_string(t) + " agent " +
                        std::to_string(i) + " (time steps must be contiguous)");
                }
            }
        }
        SimulationTrace tr;
        tr.run_id = static_cast<int>(id);
        tr.performances = std::move(matrix);
        const std::vector<double> weights(n, 1.0);
        tr.complexity.reserve(steps1);
        for (const auto& row : tr.performances) {
            tr.complexity.push_back(aggregate_complexity(row, weights));
        }
        traces.push_back(std::move(tr));
    }
    return traces;
}

std::string config_to_json_text(const ExperimentConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

std::string report_to_json(const EvaluationReport& report) {
    ordered_json root;
    root["tool"] = kToolName;
    root["version"] = kToolVersion;
    root["protocol"] = report.protocol;
    root["config"] = config_to_json(report.config);
    ordered_json confs = ordered_json::array();
    for (const ConfigurationReport& conf : report.configurations) {
        ordered_json c;
        c["n_benchmarks"] = conf.n_benchmarks;
        c["train_accuracy"] = {{"mean", conf.train_mean}, {"sd", conf.train_sd}};
        c["test_accuracy"] = {{"mean", conf.test_mean}, {"sd", conf.test_sd}};
        ordered_json reps = ordered_json::array();
        for (const RepetitionResult& r : conf.repetitions) {
            ordered_json j;
            j["repetition"] = r.repetition;
            j["train_accuracy"] = r.train_accuracy;
            j["test_accuracy"] = r.test_accuracy;
            j["theta_star"] = r.theta_star;
            j["optimizer_iterations"] = r.optimizer_iterations;
            j["optimizer_converged"] = r.optimizer_converged;
            j["train_excluded"] = r.train_excluded;
            j["test_excluded"] = r.test_excluded;
            j["detection_offsets"] = r.detection_offsets;
            reps.push_back(std::move(j));
        }
        c["repetitions"] = std::move(reps);
        ordered_json hist;
        hist["window_start"] = conf.detection_histogram.window_start;
        hist["window_end"] = conf.detection_histogram.window_end;
        hist["in_window"] = conf.detection_histogram.in_window;
        hist["total"] = conf.detection_histogram.total;
        ordered_json bins = ordered_json::array();
        for (const auto& [offset, count] : conf.detection_histogram.counts) {
            bins.push_back({{"offset", offset}, {"count", count}});
        }
        hist["bins"] = std::move(bins);
        c["detection_histogram"] = std::move(hist);
        confs.push_back(std::move(c));
    }
    root["configurations"] = std::move(confs);
    return root.dump(2) + "\n";
}

void write_report(const EvaluationReport& report,
                  const std::filesystem::path& path) {
    atomic_write(path, report_to_json(report));
}

void emit_aligned_plot_data(const AlignedEnsemble& aligned, SdStatistic statistic,
                            double theta_star, const std::filesystem::path& out_dir,
                            const std::string& suffix) {
    std::filesystem::create_directories(out_dir);

    // Fig. 1: per-run aligned complexity plus mean overlay (run_id -1).
    std::string fig1 = "run_id,relative_t,complexity\n";
    for (std::size_t k = 0; k < aligned.traces.size(); ++k) {
        for (int rel = -aligned.pre_span; rel <= aligned.post_span; ++rel) {
            fig1 += std::to_string(aligned.traces[k]->run_id);
            fig1 += ',';
            fig1 += std::to_string(rel);
            fig1 += ',';
            fig1 += format_double(aligned.complexity(k, rel));
            fig1 += '\n';
        }
    }
    const EnsembleStatistics stats = ensemble_statistics(aligned);
    for (int rel = -aligned.pre_span; rel <= aligned.post_span; ++rel) {
        fig1 += "-1,";
        fig1 += std::to_string(rel);
        fig1 += ',';
        fig1 += format_double(
            stats.mean_complexity[static_cast<std::size_t>(rel + aligned.pre_span)]);
        fig1 += '\n';
    }
    atomic_write(out_dir / ("fig1" + suffix + ".csv"), fig1);

    // Fig. 2: cross-run variance of C and mean of per-run agent variances.
    std::string fig2 = "relative_t,var_complexity,mean_agent_variance\n";
    for (int rel = -aligned.pre_span; rel <= aligned.post_span; ++rel) {
        const auto slot = static_cast<std::size_t>(rel + aligned.pre_span);
        fig2 += std::to_string(rel);
        fig2 += ',';
        fig2 += format_double(stats.var_complexity[slot]);
        fig2 += ',';
        fig2 += format_double(stats.mean_agent_variance[slot]);
        fig2 += '\n';
    }
    atomic_write(out_dir / ("fig2" + suffix + ".csv"), fig2);

    // Fig. 3: per-run S' trajectories on relative time, mean overlay
    // (run_id -1), threshold and criticality marker in the meta file.
    std::string fig3 = "run_id,relative_t,sprime\n";
    std::vector<DerivativeSeries> derivs;
    derivs.reserve(aligned.traces.size());
    for (const SimulationTrace* tr : aligned.traces) {
        derivs.push_back(sd_derivative(detection_sd_series(*tr, statistic)));
    }
    for (int rel = -aligned.pre_span; rel <= aligned.post_span; ++rel) {
        double sum = 0.0;
        int present = 0;
        for (std::size_t k = 0; k < aligned.traces.size(); ++k) {
            const int abs_t = *aligned.traces[k]->critical_index + rel;
            const int i = abs_t - derivs[k].start_index;
            if (i < 0 || static_cast<std::size_t>(i) >= derivs[k].values.size()) {
                continue;
            }
            const double v = derivs[k].values[static_cast<std::size_t>(i)];
            fig3 += std::to_string(aligned.traces[k]->run_id);
            fig3 += ',';
            fig3 += std::to_string(rel);
            fig3 += ',';
            fig3 += format_double(v);
            fig3 += '\n';
            sum += v;
            ++present;
        }
        if (present > 0) {
            fig3 += "-1,";
            fig3 += std::to_string(rel);
            fig3 += ',';
            fig3 += format_double(sum / present);
            fig3 += '\n';
        }
    }
    atomic_write(out_dir / ("fig3" + suffix + ".csv"), fig3);
    atomic_write(out_dir / ("fig3" + suffix + "_meta.csv"),
                 "theta_star,critical_relative_t\n" + format_double(theta_star) +
                     ",0\n");
}

void emit_histogram_plot_data(const EvaluationReport& report,
                              const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const ConfigurationReport& conf : report.configurations) {
        std::string csv = "kind,offset,count\n";
        const Histogram& h = conf.detection_histogram;
        csv += "window_start," + std::to_string(h.window_start) + ",0\n";
        csv += "window_end," + std::to_string(h.window_end) + ",0\n";
        for (const auto& [offset, count] : h.counts) {
            csv += "bin," + std::to_string(offset) + "," + std::to_string(count) +
                   "\n";
        }
        atomic_write(out_dir /
                         ("fig4_n" + std::to_string(conf.n_benchmarks) + ".csv"),
                     csv);
    }
}

void write_plot_schema(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    atomic_write(out_dir / "plot_schema.txt",
                 "Plot data schemas (all numbers printed with %.17g so doubles "
                 "round-trip exactly)\n"
                 "\n"
                 "fig1*.csv: run_id,relative_t,complexity\n"
                 "  Aligned aggregate complexity per run; relative_t 0 is each "
                 "run's own critical index. run_id -1 is the cross-run mean "
                 "overlay.\n"
                 "\n"
                 "fig2*.csv: relative_t,var_complexity,mean_agent_variance\n"
                 "  var_complexity: cross-run population variance of C at each "
                 "relative time. mean_agent_variance: mean over runs of the "
                 "per-run cross-agent performance variance.\n"
                 "\n"
                 "fig3*.csv: run_id,relative_t,sprime\n"
                 "  Per-run derivative of the detection SD series; run_id -1 is "
                 "the mean overlay. fig3*_meta.csv carries theta_star and the "
                 "criticality marker (relative_t = 0).\n"
                 "\n"
                 "fig4_n<N>.csv: kind,offset,count\n"
                 "  'bin' rows: detection-time offsets (detected - tau) with "
                 "unit-width counts, pooled over repetitions. 'window_start' / "
                 "'window_end' rows mark the correct-detection region.\n"
                 "\n"
                 "report.json: evaluation report; keys are frozen by the "
                 "golden-file tests. Accuracy statistics use the population SD "
                 "convention.\n"
                 "traces.csv: run_id,t,agent_id,performance (long format)\n"
                 "traces_complexity.csv: run_id,t,complexity\n");
}

void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& path) {
    ordered_json root;
    root["tool"] = kToolName;
    root["version"] = kToolVersion;
    root["command_line"] = manifest.command_line;
    root["master_seed"] = manifest.master_seed;
    {
        char buf[32];
        const std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        root["created_utc"] = buf;
    }
    if (!manifest.config_echo.empty()) {
        root["config"] = ordered_json::parse(manifest.config_echo);
    }
    ordered_json files = ordered_json::array();
    for (const std::filesystem::path& file : manifest.files) {
        std::ifstream in(file, std::ios::binary);
        if (!in) throw std::runtime_error("manifest: missing file " + file.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        files.push_back({{"name", file.filename().string()},
                         {"digest_fnv1a64", fnv1a64_hex(buf.str())}});
    }
    root["files"] = std::move(files);
    atomic_write(path, root.dump(2) + "\n");
}

} // namespace crit::io
