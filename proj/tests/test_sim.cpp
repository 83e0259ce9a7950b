#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <set>

#include "crit/sim.hpp"

using namespace crit;

TEST_CASE("initialize_agents") {
    DynamicsParams params = DynamicsParams::defaults(10);

    SUBCASE("initial performances fall in [0, 0.7]") {
        for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
            RandomStream rng(seed);
            const SystemState s = initialize_agents(params, rng);
            CHECK(s.t == 0);
            for (double p : s.performances) {
                CHECK(p >= 0.0);
                CHECK(p <= 0.7);
            }
        }
    }

    SUBCASE("collapsed init range pins every agent") {
        params.init_min = params.init_max = 0.7;
        RandomStream rng(3);
        for (double p : initialize_agents(params, rng).performances) {
            CHECK(p == 0.7);
        }
    }

    SUBCASE("same seed gives identical initial state") {
        RandomStream a(7), b(7);
        CHECK(initialize_agents(params, a).performances ==
              initialize_agents(params, b).performances);
    }
}

TEST_CASE("find_critical_index") {
    CHECK(find_critical_index(std::vector<double>{0.5, 0.7, 0.81, 0.83}, 0.8) == 2);
    CHECK(find_critical_index(std::vector<double>{0.5, 0.6, 0.7}, 0.8) ==
          std::nullopt);
    CHECK(find_critical_index(std::vector<double>{0.9, 0.5}, 0.8) == 0);
    // Strict exceedance: exactly c_max does not count.
    CHECK(find_critical_index(std::vector<double>{0.8, 0.8}, 0.8) == std::nullopt);
    CHECK_THROWS_AS(find_critical_index(std::vector<double>{}, 0.8),
                    std::invalid_argument);
}

TEST_CASE("run_simulation") {
    DynamicsParams params = DynamicsParams::defaults(4);

    SUBCASE("length contract: steps+1 rows") {
        const SimulationTrace tr = run_simulation(params, 300, 11);
        CHECK(tr.performances.size() == 301);
        CHECK(tr.complexity.size() == 301);
        CHECK(tr.steps() == 300);
    }

    SUBCASE("noise-free recurrence matches independently iterated closed form") {
        DynamicsParams det = DynamicsParams::defaults(1);
        det.sigma_base = 0.0;
        det.mu_gain_min = det.mu_gain_max = 0.05;
        det.c_max = 1.0; // never critical: C stays <= 1
        det.init_min = det.init_max = 0.5;
        const SimulationTrace tr = run_simulation(det, 300, 17);
        double p = 0.5;
        for (int t = 0; t <= 300; ++t) {
            CHECK(std::abs(tr.performances[static_cast<std::size_t>(t)][0] - p) <
                  1e-12);
            p = std::min(p + 0.05 / (1.0 + p), 1.0);
        }
    }

    SUBCASE("determinism") {
        const SimulationTrace a = run_simulation(params, 50, 123);
        const SimulationTrace b = run_simulation(params, 50, 123);
        CHECK(a.performances == b.performances);
        CHECK(a.complexity == b.complexity);
        CHECK(a.critical_index == b.critical_index);
    }

    SUBCASE("complexity column is consistent with the performance matrix") {
        const SimulationTrace tr = run_simulation(params, 100, 5);
        for (std::size_t t = 0; t < tr.performances.size(); ++t) {
            CHECK(std::abs(tr.complexity[t] -
                           aggregate_complexity(tr.performances[t],
                                                params.weights)) < 1e-12);
            for (double p : tr.performances[t]) {
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
            }
        }
        if (tr.critical_index) {
            for (int t = 0; t < *tr.critical_index; ++t) {
                CHECK(tr.complexity[static_cast<std::size_t>(t)] <= params.c_max);
            }
            CHECK(tr.complexity[static_cast<std::size_t>(*tr.critical_index)] >
                  params.c_max);
        }
    }
}

TEST_CASE("run_ensemble") {
    const DynamicsParams params = DynamicsParams::defaults(5);

    SUBCASE("distinct deterministic seeds") {
        const Ensemble e = run_ensemble(params, 100, 50, 42, 1);
        std::set<std::uint64_t> seeds;
        for (const SimulationTrace& tr : e.traces) seeds.insert(tr.seed);
        CHECK(seeds.size() == 100);
        CHECK(e.traces[7].seed == run_seed(42, 7));
    }

    SUBCASE("singleton ensemble equals run_simulation") {
        const Ensemble e = run_ensemble(params, 1, 60, 9, 1);
        const SimulationTrace tr = run_simulation(params, 60, run_seed(9, 0), 0);
        CHECK(e.traces[0].performances == tr.performances);
    }

    SUBCASE("parallel and sequential execution agree exactly") {
        const Ensemble seq = run_ensemble(params, 40, 80, 77, 1);
        const Ensemble par = run_ensemble(params, 40, 80, 77, 8);
        REQUIRE(seq.traces.size() == par.traces.size());
        for (std::size_t k = 0; k < seq.traces.size(); ++k) {
            CHECK(seq.traces[k].run_id == par.traces[k].run_id);
            CHECK(seq.traces[k].performances == par.traces[k].performances);
        }
    }

    SUBCASE("defaults reach criticality in at least 99% of runs") {
        const Ensemble e = run_ensemble(params, 100, 300, 2024);
        int critical = 0;
        for (const SimulationTrace& tr : e.traces) {
            if (tr.critical_index) ++critical;
        }
        CHECK(critical >= 99);
    }
}
