// Full experimental protocol: per-configuration train/test ensembles,
// threshold calibration, held-out evaluation, repetitions with mean/SD
// aggregation, and detection-time histograms.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crit/detect.hpp"

namespace crit {

struct ExperimentConfig {
    std::vector<int> benchmark_counts = {2, 5, 10, 20};
    int train_runs = 100;
    int test_runs = 100;
    int repetitions = 20;
    int steps = 300;
    std::uint64_t master_seed = 1;
    // Template for per-configuration dynamics; n_benchmarks, weights and
    // volatility factors are filled in per (n, repetition).
    DynamicsParams dynamics = DynamicsParams::defaults(1);
    DetectorConfig detector;   // theta ignored; calibrated per repetition
    OptimizerConfig optimizer;
    SdStatistic statistic = SdStatistic::cross_agent;
    unsigned threads = 0;      // 0 = hardware concurrency

    void validate() const;
};

struct RepetitionResult {
    int repetition = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double theta_star = 0.0;
    int optimizer_iterations = 0;
    bool optimizer_converged = false;
    int train_excluded = 0; // runs that never reached criticality
    int test_excluded = 0;
    std::vector<int> detection_offsets; // detected - tau, detecting test runs only
};

struct Histogram {
    std::map<int, int> counts; // unit-width integer bins, keyed by offset
    int window_start = 0;
    int window_end = 0;
    int in_window = 0;
    int total = 0;
};

struct ConfigurationReport {
    int n_benchmarks = 0;
    double train_mean = 0.0, train_sd = 0.0;
    double test_mean = 0.0, test_sd = 0.0;
    std::vector<RepetitionResult> repetitions;
    Histogram detection_histogram; // pooled over repetitions
};

struct EvaluationReport {
    ExperimentConfig config;
    std::string protocol =
        "independent train/test regeneration per repetition (100 train + 100 test)";
    std::vector<ConfigurationReport> configurations;
};

// Population mean/SD of a sample; SD is 0 for a single value.
std::pair<double, double> mean_sd(std::span<const double> values);

Histogram detection_time_histogram(std::span<const int> offsets, int window);

// Seeds for a repetition's streams, derived so adding configurations never
// perturbs existing ones.
std::uint64_t repetition_seed(std::uint64_t master_seed, int n, int repetition,
                              const std::string& tag);

RepetitionResult run_repetition(int n, const ExperimentConfig& config,
                                int repetition);

EvaluationReport run_experiment(const ExperimentConfig& config);

} // namespace crit
