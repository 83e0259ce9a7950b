// Threshold-crossing criticality detection, windowed accuracy scoring, and
// grid-initialized finite-difference SGD threshold calibration.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "crit/stats.hpp"

namespace crit {

struct DetectorConfig {
    double theta = 0.0;
    int burn_in = 2;  // earliest time index eligible for detection
    int window = 10;  // detections in [tau, tau + window] count as correct
};

struct DetectionItem {
    DerivativeSeries derivatives; // absolute time indices
    int critical_index = 0;       // ground-truth tau
};

struct DetectionDataset {
    std::vector<DetectionItem> items;
};

struct OptimizerConfig {
    double learning_rate = 1e-5;
    double tolerance = 1e-6;
    int max_iterations = 1000;
    double epsilon = 1e-4;      // forward-difference step
    int grid_count = 101;       // candidates spanning the derivative range
    std::optional<std::vector<double>> grid; // overrides grid_count when set
};

struct OptimizerResult {
    double theta_star = 0.0;
    int iterations = 0;
    bool converged = false;
    double final_accuracy = 0.0;
    std::vector<std::pair<double, double>> trajectory; // (theta, loss) per iterate
};

// First absolute index t >= burn_in with S'(t) > theta, or absent.
std::optional<int> detect_critical_time(const DerivativeSeries& derivatives,
                                        const DetectorConfig& config);

// Fraction of runs whose detection d satisfies tau <= d <= tau + window.
// Runs without a detection count as incorrect.
double detection_accuracy(const DetectionDataset& dataset,
                          const DetectorConfig& config);

double loss(const DetectionDataset& dataset, const DetectorConfig& config,
            double theta);

double estimate_gradient(const DetectionDataset& dataset,
                         const DetectorConfig& config, double theta,
                         double epsilon);

// count equally spaced thresholds over [min, max] of all derivative values;
// a single candidate when the data is constant.
std::vector<double> grid_candidates(const DetectionDataset& dataset, int count);

OptimizerResult sgd_optimize(const DetectionDataset& dataset,
                             const DetectorConfig& detector,
                             const OptimizerConfig& config);

// Derivative series + ground truth for every critical-reaching trace.
DetectionDataset build_detection_dataset(const Ensemble& ensemble,
                                         SdStatistic statistic);

} // namespace crit
