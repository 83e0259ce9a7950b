// Stateless dynamics: aggregate complexity, pre/post-critical performance
// updates, excess-complexity ratio, volatility factors, unit clamping.
#pragma once

#include <span>
#include <vector>

#include "crit/rng.hpp"

namespace crit {

enum class VolatilityMode {
    // Shared exponential factor exp(1 + excess_ratio), >= e.
    framework,
    // Per-agent constant factor in [0, 1].
    experiment,
};

struct DynamicsParams {
    int n_benchmarks = 0;
    std::vector<double> weights;                 // (1/n) * sum == 1
    double c_max = 0.8;
    double sigma_base = 0.01;
    double mu_gain_min = 0.0;
    double mu_gain_max = 0.05;
    double sigma_var = 0.1;
    VolatilityMode volatility_mode = VolatilityMode::experiment;
    std::vector<double> agent_volatility_factors; // experiment mode, each in [0,1]
    double init_min = 0.0;                        // initial performance range
    double init_max = 0.7;

    // Uniform weights, volatility factors all 1.
    static DynamicsParams defaults(int n);

    // Throws std::invalid_argument on any invariant violation.
    void validate() const;
};

struct SystemState {
    int t = 0;
    std::vector<double> performances; // each in [0,1], length n_benchmarks
};

double aggregate_complexity(std::span<const double> performances,
                            std::span<const double> weights);

double excess_complexity_ratio(double c, double c_max);

double volatility_factor_framework(double ratio);

double clamp_unit(double x);

double pre_critical_update(double p, double gain_draw);

double post_critical_update(double p, double std_normal_draw, double vol_factor,
                            double sigma_var);

// One synchronous step over all agents. Draw order is agent index ascending;
// in the pre-critical branch each agent draws mu then the gain. The branch is
// chosen once per step from the aggregate complexity of the incoming state.
SystemState step_system(const SystemState& state, const DynamicsParams& params,
                        RandomStream& rng);

} // namespace crit
