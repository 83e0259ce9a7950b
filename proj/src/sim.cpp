#include "crit/sim.hpp"

#include "crit/kernels.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

namespace crit {

SystemState initialize_agents(const DynamicsParams& params, RandomStream& rng) {
    params.validate();
    SystemState state;
    state.t = 0;
    state.performances.resize(static_cast<std::size_t>(params.n_benchmarks));
    for (double& p : state.performances) {
        p = rng.uniform(params.init_min, params.init_max);
    }
    return state;
}

std::optional<int> find_critical_index(std::span<const double> complexity,
                                       double c_max) {
    if (complexity.empty()) {
        throw std::invalid_argument("find_critical_index: empty series");
    }
    const std::ptrdiff_t idx = kern::first_above(complexity, c_max);
    if (idx < 0) return std::nullopt;
    return static_cast<int>(idx);
}

SimulationTrace run_simulation(const DynamicsParams& params, int steps,
                               std::uint64_t seed, int run_id) {
    if (steps < 1) throw std::invalid_argument("run_simulation: steps must be >= 1");
    params.validate();

    RandomStream rng(seed);
    SystemState state = initialize_agents(params, rng);

    SimulationTrace trace;
    trace.run_id = run_id;
    trace.seed = seed;
    trace.performances.reserve(static_cast<std::size_t>(steps) + 1);
    trace.complexity.reserve(static_cast<std::size_t>(steps) + 1);
    trace.performances.push_back(state.performances);
    trace.complexity.push_back(aggregate_complexity(state.performances, params.weights));
    for (int t = 0; t < steps; ++t) {
        state = step_system(state, params, rng);
        trace.performances.push_back(state.performances);
        trace.complexity.push_back(
            aggregate_complexity(state.performances, params.weights));
    }
    trace.critical_index = find_critical_index(trace.complexity, params.c_max);
    return trace;
}

std::uint64_t run_seed(std::uint64_t base_seed, int run_index) {
    return derive_seed(base_seed, static_cast<std::uint64_t>(run_index));
}

Ensemble run_ensemble(const DynamicsParams& params, int count, int steps,
                      std::uint64_t base_seed, unsigned threads) {
    if (count < 1) throw std::invalid_argument("run_ensemble: count must be >= 1");
    params.validate();

    Ensemble ensemble;
    ensemble.params = params;
    ensemble.steps = steps;
    ensemble.base_seed = base_seed;
    ensemble.traces.resize(static_cast<std::size_t>(count));

    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads <= 1 || count == 1) {
        for (int k = 0; k < count; ++k) {
            ensemble.traces[static_cast<std::size_t>(k)] =
                run_simulation(params, steps, run_seed(base_seed, k), k);
        }
        return ensemble;
    }

    // Traces land in their run_id slot, so completion order is irrelevant.
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= count) break;
            ensemble.traces[static_cast<std::size_t>(k)] =
                run_simulation(params, steps, run_seed(base_seed, k), k);
        }
    };
    std::vector<std::thread> pool;
    const unsigned nthreads = std::min<unsigned>(threads, static_cast<unsigned>(count));
    pool.reserve(nthreads);
    for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return ensemble;
}

} // namespace crit
