#include "crit/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "crit/kernels.hpp"

namespace crit {

DynamicsParams DynamicsParams::defaults(int n) {
    DynamicsParams p;
    p.n_benchmarks = n;
    p.weights.assign(static_cast<std::size_t>(n), 1.0);
    p.agent_volatility_factors.assign(static_cast<std::size_t>(n), 1.0);
    return p;
}

void DynamicsParams::validate() const {
    if (n_benchmarks < 1) {
        throw std::invalid_argument("n_benchmarks must be positive");
    }
    const auto n = static_cast<std::size_t>(n_benchmarks);
    if (weights.size() != n) {
        throw std::invalid_argument("weights length must equal n_benchmarks");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum / static_cast<double>(n) - 1.0) > 1e-9) {
        throw std::invalid_argument("weights must average to 1 (got mean " +
                                    std::to_string(sum / static_cast<double>(n)) + ")");
    }
    if (!(c_max > 0.0) || c_max > 1.0) {
        throw std::invalid_argument("c_max must lie in (0, 1]");
    }
    if (!(sigma_base >= 0.0)) throw std::invalid_argument("sigma_base must be >= 0");
    if (!(sigma_var >= 0.0)) throw std::invalid_argument("sigma_var must be >= 0");
    if (!(mu_gain_min >= 0.0) || mu_gain_min > mu_gain_max) {
        throw std::invalid_argument("require 0 <= mu_gain_min <= mu_gain_max");
    }
    if (agent_volatility_factors.size() != n) {
        throw std::invalid_argument(
            "agent_volatility_factors length must equal n_benchmarks");
    }
    for (double f : agent_volatility_factors) {
        if (!(f >= 0.0 && f <= 1.0)) {
            throw std::invalid_argument("agent volatility factors must lie in [0, 1]");
        }
    }
    if (!(init_min >= 0.0) || init_min > init_max || init_max > 1.0) {
        throw std::invalid_argument("require 0 <= init_min <= init_max <= 1");
    }
}

double aggregate_complexity(std::span<const double> performances,
                            std::span<const double> weights) {
    if (performances.empty() || performances.size() != weights.size()) {
        throw std::invalid_argument(
            "aggregate_complexity: need equal nonempty performance/weight vectors");
    }
    return kern::weighted_mean(performances, weights);
}

double excess_complexity_ratio(double c, double c_max) {
    if (!(c_max > 0.0)) throw std::invalid_argument("c_max must be positive");
    const double r = (c - c_max) / c_max;
    return r > 0.0 ? r : 0.0;
}

double volatility_factor_framework(double ratio) {
    return std::exp(1.0 + ratio);
}

double clamp_unit(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("clamp_unit: non-finite input");
    return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
}

double pre_critical_update(double p, double gain_draw) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("pre_critical_update: p outside [0, 1]");
    }
    return clamp_unit(p + gain_draw / (1.0 + p));
}

double post_critical_update(double p, double std_normal_draw, double vol_factor,
                            double sigma_var) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("post_critical_update: p outside [0, 1]");
    }
    if (!(vol_factor >= 0.0)) {
        throw std::invalid_argument("post_critical_update: negative vol_factor");
    }
    if (!(sigma_var >= 0.0)) {
        throw std::invalid_argument("post_critical_update: negative sigma_var");
    }
    return clamp_unit(p + std_normal_draw * vol_factor * sigma_var);
}

SystemState step_system(const SystemState& state, const DynamicsParams& params,
                        RandomStream& rng) {
    params.validate();
    const auto n = static_cast<std::size_t>(params.n_benchmarks);
    if (state.performances.size() != n) {
        throw std::invalid_argument("step_system: state size mismatch");
    }

    SystemState next;
    next.t = state.t + 1;
    next.performances = state.performances;

    const double c = aggregate_complexity(state.performances, params.weights);
    std::vector<double> draws(n);
    if (c <= params.c_max) {
        for (std::size_t i = 0; i < n; ++i) {
            const double mu = rng.uniform(params.mu_gain_min, params.mu_gain_max);
            draws[i] = rng.normal(mu, params.sigma_base);
        }
        kern::pre_update_span(next.performances, draws);
    } else {
        std::vector<double> scale(n);
        if (params.volatility_mode == VolatilityMode::framework) {
            const double vf =
                volatility_factor_framework(excess_complexity_ratio(c, params.c_max));
            for (std::size_t i = 0; i < n; ++i) scale[i] = vf * params.sigma_var;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                scale[i] = params.agent_volatility_factors[i] * params.sigma_var;
            }
        }
        for (std::size_t i = 0; i < n; ++i) draws[i] = rng.normal(0.0, 1.0);
        kern::post_update_span(next.performances, draws, scale);
    }
    return next;
}

} // namespace crit
