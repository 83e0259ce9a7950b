// Seeded ensemble simulation: full per-run traces, ground-truth critical
// indices, deterministic seed derivation, order-independent parallel runs.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "crit/model.hpp"

namespace crit {

struct SimulationTrace {
    int run_id = 0;
    std::uint64_t seed = 0;
    // (steps + 1) rows, n columns; row t holds P_i(t) including t = 0.
    std::vector<std::vector<double>> performances;
    std::vector<double> complexity; // C(t), length steps + 1
    std::optional<int> critical_index; // first t with C(t) > c_max

    int steps() const { return static_cast<int>(complexity.size()) - 1; }
    int agents() const {
        return performances.empty() ? 0 : static_cast<int>(performances[0].size());
    }
};

struct Ensemble {
    DynamicsParams params;
    int steps = 0;
    std::uint64_t base_seed = 0;
    std::vector<SimulationTrace> traces; // indexed by run_id
};

// P_i(0) ~ U[init_min, init_max], one draw per agent in index order.
SystemState initialize_agents(const DynamicsParams& params, RandomStream& rng);

std::optional<int> find_critical_index(std::span<const double> complexity,
                                       double c_max);

SimulationTrace run_simulation(const DynamicsParams& params, int steps,
                               std::uint64_t seed, int run_id = 0);

std::uint64_t run_seed(std::uint64_t base_seed, int run_index);

// `threads <= 1` runs sequentially; results are identical either way.
Ensemble run_ensemble(const DynamicsParams& params, int count, int steps,
                      std::uint64_t base_seed, unsigned threads = 0);

} // namespace crit
