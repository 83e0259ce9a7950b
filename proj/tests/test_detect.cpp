#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "crit/detect.hpp"

using namespace crit;

namespace {

DerivativeSeries series(std::vector<double> values, int start_index) {
    DerivativeSeries d;
    d.values = std::move(values);
    d.start_index = start_index;
    return d;
}

// Independent re-scan oracle for accuracy.
double brute_force_accuracy(const DetectionDataset& dataset, double theta,
                            int burn_in, int window) {
    int correct = 0;
    for (const DetectionItem& item : dataset.items) {
        int detected = -1;
        for (std::size_t i = 0; i < item.derivatives.values.size(); ++i) {
            const int t = item.derivatives.start_index + static_cast<int>(i);
            if (t >= burn_in && item.derivatives.values[i] > theta) {
                detected = t;
                break;
            }
        }
        if (detected >= item.critical_index &&
            detected <= item.critical_index + window) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.items.size());
}

DetectionDataset random_dataset(std::uint64_t seed, int runs, int len) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> val(-0.01, 0.05);
    std::uniform_int_distribution<int> tau(5, len - 15);
    DetectionDataset ds;
    for (int r = 0; r < runs; ++r) {
        DetectionItem item;
        item.critical_index = tau(eng);
        std::vector<double> values(static_cast<std::size_t>(len));
        for (int i = 0; i < len; ++i) {
            double v = val(eng);
            if (i > item.critical_index) v += 0.02; // mild post-critical lift
            values[static_cast<std::size_t>(i)] = v;
        }
        item.derivatives = series(std::move(values), 2);
        ds.items.push_back(std::move(item));
    }
    return ds;
}

} // namespace

TEST_CASE("detect_critical_time") {
    DetectorConfig config;
    config.burn_in = 2;

    SUBCASE("first crossing above burn-in") {
        config.theta = 0.01;
        const auto d = series({0.001, 0.002, 0.020, 0.001}, 2);
        CHECK(detect_critical_time(d, config) == 4);
    }

    SUBCASE("no crossing is absent") {
        config.theta = 0.5;
        CHECK(detect_critical_time(series({0.1, 0.2, 0.3}, 2), config) ==
              std::nullopt);
    }

    SUBCASE("theta below all values fires at burn-in") {
        config.theta = -1.0;
        CHECK(detect_critical_time(series({0.0, 0.0, 0.0}, 2), config) == 2);
    }

    SUBCASE("burn-in beyond series start skips early values") {
        config.theta = 0.0;
        config.burn_in = 4;
        CHECK(detect_critical_time(series({1.0, 1.0, 1.0, 1.0}, 2), config) == 4);
        config.burn_in = 100;
        CHECK(detect_critical_time(series({1.0, 1.0}, 2), config) == std::nullopt);
    }

    SUBCASE("monotonicity: raising theta never detects earlier") {
        std::mt19937_64 eng(5);
        std::uniform_real_distribution<double> val(-0.02, 0.06);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> values(60);
            for (double& v : values) v = val(eng);
            const auto d = series(std::move(values), 2);
            std::optional<int> prev;
            bool prev_set = false;
            for (double theta = -0.03; theta <= 0.07; theta += 0.001) {
                config.theta = theta;
                config.burn_in = 2;
                const auto cur = detect_critical_time(d, config);
                if (prev_set) {
                    if (!prev) {
                        CHECK(!cur); // once absent, stays absent
                    } else if (cur) {
                        CHECK(*cur >= *prev);
                    }
                }
                prev = cur;
                prev_set = true;
            }
        }
    }
}

TEST_CASE("detection_accuracy") {
    DetectorConfig config;
    config.window = 10;

    SUBCASE("windowed scoring") {
        // Detections at 10, 12, 25 with tau = 10: two inside [10, 20].
        DetectionDataset ds;
        auto item_with_first_crossing_at = [](int at, int tau) {
            DetectionItem item;
            std::vector<double> values(40, 0.0);
            values[static_cast<std::size_t>(at - 2)] = 1.0;
            item.derivatives = series(std::move(values), 2);
            item.critical_index = tau;
            return item;
        };
        ds.items = {item_with_first_crossing_at(10, 10),
                    item_with_first_crossing_at(12, 10),
                    item_with_first_crossing_at(25, 10)};
        config.theta = 0.5;
        CHECK(detection_accuracy(ds, config) == doctest::Approx(2.0 / 3.0));

        config.theta = 2.0; // nothing detects
        CHECK(detection_accuracy(ds, config) == 0.0);
    }

    SUBCASE("perfect detection") {
        DetectionDataset ds;
        for (int tau : {5, 9, 14}) {
            DetectionItem item;
            std::vector<double> values(30, 0.0);
            values[static_cast<std::size_t>(tau - 2)] = 1.0;
            item.derivatives = series(std::move(values), 2);
            item.critical_index = tau;
            ds.items.push_back(std::move(item));
        }
        config.theta = 0.5;
        CHECK(detection_accuracy(ds, config) == 1.0);
    }

    SUBCASE("empty dataset rejected") {
        CHECK_THROWS_AS(detection_accuracy(DetectionDataset{}, config),
                        std::invalid_argument);
    }

    SUBCASE("matches the brute-force oracle exactly on a threshold grid") {
        const DetectionDataset ds = random_dataset(21, 10, 60);
        for (int i = 0; i <= 100; ++i) {
            const double theta = -0.02 + 0.001 * i;
            config.theta = theta;
            CHECK(detection_accuracy(ds, config) ==
                  brute_force_accuracy(ds, theta, config.burn_in, config.window));
        }
    }
}

TEST_CASE("loss and gradient") {
    const DetectionDataset ds = random_dataset(33, 8, 50);
    DetectorConfig config;

    SUBCASE("loss is the negated accuracy") {
        for (double theta : {-0.01, 0.0, 0.01, 0.03}) {
            config.theta = theta;
            CHECK(loss(ds, config, theta) == -detection_accuracy(ds, config));
        }
    }

    SUBCASE("gradient equals the two-loss quotient exactly") {
        for (double theta : {-0.005, 0.004, 0.021}) {
            const double eps = 1e-4;
            const double expected =
                (loss(ds, config, theta + eps) - loss(ds, config, theta)) / eps;
            CHECK(estimate_gradient(ds, config, theta, eps) == expected);
        }
    }

    SUBCASE("flat region gives zero gradient") {
        // Far above every derivative value the loss is constant 0.
        CHECK(estimate_gradient(ds, config, 10.0, 1e-4) == 0.0);
    }

    SUBCASE("epsilon must be positive") {
        CHECK_THROWS_AS(estimate_gradient(ds, config, 0.0, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(estimate_gradient(ds, config, 0.0, -1e-4),
                        std::invalid_argument);
    }
}

TEST_CASE("grid_candidates") {
    DetectionDataset ds;
    DetectionItem item;
    item.derivatives = series({0.0, 0.025, 0.1, 0.05}, 2);
    item.critical_index = 3;
    ds.items.push_back(item);

    SUBCASE("linear spacing over the data range") {
        const auto grid = grid_candidates(ds, 3);
        REQUIRE(grid.size() == 3);
        CHECK(grid[0] == doctest::Approx(0.0));
        CHECK(grid[1] == doctest::Approx(0.05));
        CHECK(grid[2] == doctest::Approx(0.1));
    }

    SUBCASE("count=2 gives endpoints") {
        const auto grid = grid_candidates(ds, 2);
        REQUIRE(grid.size() == 2);
        CHECK(grid[0] == doctest::Approx(0.0));
        CHECK(grid[1] == doctest::Approx(0.1));
    }

    SUBCASE("constant data collapses to one candidate") {
        DetectionDataset flat;
        DetectionItem f;
        f.derivatives = series({0.02, 0.02, 0.02}, 2);
        f.critical_index = 2;
        flat.items.push_back(f);
        const auto grid = grid_candidates(flat, 5);
        REQUIRE(grid.size() == 1);
        CHECK(grid[0] == doctest::Approx(0.02));
    }

    CHECK_THROWS_AS(grid_candidates(ds, 1), std::invalid_argument);
}

TEST_CASE("sgd_optimize") {
    const DetectionDataset ds = random_dataset(55, 10, 60);
    DetectorConfig detector;
    OptimizerConfig config;

    SUBCASE("flat loss converges in one iteration to the initial theta") {
        OptimizerConfig flat = config;
        flat.grid = std::vector<double>{10.0}; // far above all data: loss flat 0
        const OptimizerResult r = sgd_optimize(ds, detector, flat);
        CHECK(r.iterations == 1);
        CHECK(r.converged);
        CHECK(r.theta_star == 10.0);
    }

    SUBCASE("best-seen guarantee: beats every grid candidate") {
        const OptimizerResult r = sgd_optimize(ds, detector, config);
        for (double theta : grid_candidates(ds, config.grid_count)) {
            DetectorConfig c = detector;
            c.theta = theta;
            CHECK(r.final_accuracy >= detection_accuracy(ds, c));
        }
        DetectorConfig best = detector;
        best.theta = r.theta_star;
        CHECK(detection_accuracy(ds, best) == doctest::Approx(r.final_accuracy));
    }

    SUBCASE("termination within max_iterations") {
        OptimizerConfig tight = config;
        tight.max_iterations = 25;
        tight.tolerance = 0.0; // never satisfied: must hit the iteration cap
        const OptimizerResult r = sgd_optimize(ds, detector, tight);
        CHECK(r.iterations <= 25);
        CHECK(!r.converged);
    }
}
