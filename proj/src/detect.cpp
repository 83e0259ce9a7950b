#include "crit/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crit/kernels.hpp"

namespace crit {

std::optional<int> detect_critical_time(const DerivativeSeries& derivatives,
                                        const DetectorConfig& config) {
    if (config.window < 1) throw std::invalid_argument("window must be >= 1");
    const int first = std::max(config.burn_in, derivatives.start_index);
    const std::size_t offset =
        static_cast<std::size_t>(first - derivatives.start_index);
    if (offset >= derivatives.values.size()) return std::nullopt;
    const std::ptrdiff_t idx = kern::first_above(
        std::span<const double>(derivatives.values).subspan(offset), config.theta);
    if (idx < 0) return std::nullopt;
    return first + static_cast<int>(idx);
}

double detection_accuracy(const DetectionDataset& dataset,
                          const DetectorConfig& config) {
    if (dataset.items.empty()) {
        throw std::invalid_argument("detection_accuracy: empty dataset");
    }
    int correct = 0;
    for (const DetectionItem& item : dataset.items) {
        const auto d = detect_critical_time(item.derivatives, config);
        if (d && *d >= item.critical_index &&
            *d <= item.critical_index + config.window) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.items.size());
}

double loss(const DetectionDataset& dataset, const DetectorConfig& config,
            double theta) {
    DetectorConfig c = config;
    c.theta = theta;
    return -detection_accuracy(dataset, c);
}

double estimate_gradient(const DetectionDataset& dataset,
                         const DetectorConfig& config, double theta,
                         double epsilon) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("estimate_gradient: epsilon must be > 0");
    }
    return (loss(dataset, config, theta + epsilon) - loss(dataset, config, theta)) /
           epsilon;
}

std::vector<double> grid_candidates(const DetectionDataset& dataset, int count) {
    if (count < 2) throw std::invalid_argument("grid_candidates: count must be >= 2");
    if (dataset.items.empty()) {
        throw std::invalid_argument("grid_candidates: empty dataset");
    }
    double lo = dataset.items[0].derivatives.values.at(0);
    double hi = lo;
    for (const DetectionItem& item : dataset.items) {
        for (double v : item.derivatives.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (lo == hi) return {lo};
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        grid[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return grid;
}

OptimizerResult sgd_optimize(const DetectionDataset& dataset,
                             const DetectorConfig& detector,
                             const OptimizerConfig& config) {
    std::vector<double> grid =
        config.grid ? *config.grid : grid_candidates(dataset, config.grid_count);
    if (grid.empty()) throw std::invalid_argument("sgd_optimize: empty grid");

    // Best loss seen anywhere; ties resolved toward the smaller theta.
    double best_theta = grid[0];
    double best_loss = loss(dataset, detector, grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double l = loss(dataset, detector, grid[i]);
        if (l < best_loss || (l == best_loss && grid[i] < best_theta)) {
            best_loss = l;
            best_theta = grid[i];
        }
    }

    OptimizerResult result;
    double theta = best_theta;
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        result.iterations = iter;
        const double grad =
            estimate_gradient(dataset, detector, theta, config.epsilon);
        const double new_theta = theta - config.learning_rate * grad;

        const double l = loss(dataset, detector, new_theta);
        result.trajectory.emplace_back(new_theta, l);
        if (l < best_loss || (l == best_loss && new_theta < best_theta)) {
            best_loss = l;
            best_theta = new_theta;
        }
        const bool done = std::abs(new_theta - theta) < config.tolerance;
        theta = new_theta;
        if (done) {
            result.converged = true;
            break;
        }
    }

    result.theta_star = best_theta;
    result.final_accuracy = -best_loss;
    return result;
}

DetectionDataset build_detection_dataset(const Ensemble& ensemble,
                                         SdStatistic statistic) {
    DetectionDataset dataset;
    for (const SimulationTrace& tr : ensemble.traces) {
        if (!tr.critical_index) continue;
        DetectionItem item;
        item.derivatives = sd_derivative(detection_sd_series(tr, statistic));
        item.critical_index = *tr.critical_index;
        dataset.items.push_back(std::move(item));
    }
    return dataset;
}

} // namespace crit
