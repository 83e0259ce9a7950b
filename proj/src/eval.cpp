#include "crit/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "crit/kernels.hpp"

namespace crit {

void ExperimentConfig::validate() const {
    if (benchmark_counts.empty()) {
        throw std::invalid_argument("benchmark_counts must be nonempty");
    }
    for (int n : benchmark_counts) {
        if (n < 1) throw std::invalid_argument("benchmark counts must be positive");
    }
    if (train_runs < 1 || test_runs < 1 || repetitions < 1 || steps < 1) {
        throw std::invalid_argument(
            "train_runs, test_runs, repetitions and steps must be positive");
    }
}

std::pair<double, double> mean_sd(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean_sd: empty sample");
    return {kern::mean(values), kern::population_sd(values)};
}

Histogram detection_time_histogram(std::span<const int> offsets, int window) {
    if (window < 1) throw std::invalid_argument("histogram: window must be >= 1");
    Histogram h;
    h.window_start = 0;
    h.window_end = window;
    for (int off : offsets) {
        ++h.counts[off];
        ++h.total;
        if (off >= 0 && off <= window) ++h.in_window;
    }
    return h;
}

std::uint64_t repetition_seed(std::uint64_t master_seed, int n, int repetition,
                              const std::string& tag) {
    std::uint64_t tag_key = 1469598103934665603ULL; // FNV-1a over the tag
    for (char c : tag) {
        tag_key ^= static_cast<unsigned char>(c);
        tag_key *= 1099511628211ULL;
    }
    return derive_seed(master_seed, static_cast<std::uint64_t>(n),
                       static_cast<std::uint64_t>(repetition), tag_key);
}

namespace {

DynamicsParams configure_dynamics(int n, const ExperimentConfig& config,
                                  int repetition) {
    DynamicsParams params = config.dynamics;
    params.n_benchmarks = n;
    params.weights.assign(static_cast<std::size_t>(n), 1.0);
    // Per-agent volatility factors are redrawn each repetition and shared by
    // that repetition's train and test ensembles.
    RandomStream vf_rng(
        repetition_seed(config.master_seed, n, repetition, "volatility"));
    params.agent_volatility_factors.resize(static_cast<std::size_t>(n));
    for (double& f : params.agent_volatility_factors) f = vf_rng.uniform(0.0, 1.0);
    params.validate();
    return params;
}

int count_excluded(const Ensemble& ensemble) {
    int excluded = 0;
    for (const SimulationTrace& tr : ensemble.traces) {
        if (!tr.critical_index) ++excluded;
    }
    return excluded;
}

} // namespace

RepetitionResult run_repetition(int n, const ExperimentConfig& config,
                                int repetition) {
    config.validate();
    const DynamicsParams params = configure_dynamics(n, config, repetition);

    const Ensemble train = run_ensemble(
        params, config.train_runs, config.steps,
        repetition_seed(config.master_seed, n, repetition, "train"), config.threads);
    const Ensemble test = run_ensemble(
        params, config.test_runs, config.steps,
        repetition_seed(config.master_seed, n, repetition, "test"), config.threads);

    const DetectionDataset train_ds = build_detection_dataset(train, config.statistic);
    const DetectionDataset test_ds = build_detection_dataset(test, config.statistic);
    if (train_ds.items.empty() || test_ds.items.empty()) {
        throw std::runtime_error("run_repetition: no run reached criticality");
    }

    const OptimizerResult opt =
        sgd_optimize(train_ds, config.detector, config.optimizer);

    DetectorConfig detector = config.detector;
    detector.theta = opt.theta_star;

    RepetitionResult result;
    result.repetition = repetition;
    result.train_accuracy = opt.final_accuracy;
    result.test_accuracy = detection_accuracy(test_ds, detector);
    result.theta_star = opt.theta_star;
    result.optimizer_iterations = opt.iterations;
    result.optimizer_converged = opt.converged;
    result.train_excluded = count_excluded(train);
    result.test_excluded = count_excluded(test);
    for (const DetectionItem& item : test_ds.items) {
        if (const auto d = detect_critical_time(item.derivatives, detector)) {
            result.detection_offsets.push_back(*d - item.critical_index);
        }
    }
    return result;
}

EvaluationReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    EvaluationReport report;
    report.config = config;

    for (int n : config.benchmark_counts) {
        ConfigurationReport conf;
        conf.n_benchmarks = n;
        std::vector<double> train_accs, test_accs;
        std::vector<int> pooled_offsets;
        for (int rep = 0; rep < config.repetitions; ++rep) {
            RepetitionResult r = run_repetition(n, config, rep);
            train_accs.push_back(r.train_accuracy);
            test_accs.push_back(r.test_accuracy);
            pooled_offsets.insert(pooled_offsets.end(), r.detection_offsets.begin(),
                                  r.detection_offsets.end());
            conf.repetitions.push_back(std::move(r));
        }
        std::tie(conf.train_mean, conf.train_sd) = mean_sd(train_accs);
        std::tie(conf.test_mean, conf.test_sd) = mean_sd(test_accs);
        conf.detection_histogram =
            detection_time_histogram(pooled_offsets, config.detector.window);
        report.configurations.push_back(std::move(conf));
    }
    return report;
}

} // namespace crit
