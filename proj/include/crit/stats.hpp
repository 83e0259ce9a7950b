// Critical-point alignment and variability statistics: expanding-window SD,
// cross-agent SD, their discrete derivatives, and cross-run mean/variance
// series for aligned ensembles.
#pragma once

#include <vector>

#include "crit/sim.hpp"

namespace crit {

struct SDSeries {
    std::vector<double> values;
    int start_index = 0; // time step of values[0]
};

struct DerivativeSeries {
    std::vector<double> values;
    int start_index = 0; // time step of values[0]
};

// Which per-run variability series feeds the detector.
enum class SdStatistic {
    // Population SD across the n agent performances at each time step.
    cross_agent,
    // Mean over agents of each agent's expanding-window SD.
    mean_agent_expanding,
    // Expanding-window SD of the aggregate complexity series.
    aggregate_expanding,
};

const char* sd_statistic_name(SdStatistic s);
SdStatistic sd_statistic_from_name(const std::string& name);

// Population SD of series[0..t] inclusive (divisor t + 1). Requires t >= 1.
double expanding_sd(std::span<const double> series, int t);

// Incremental Welford accumulator; population variance convention.
class ExpandingStat {
public:
    void push(double x);
    int count() const { return n_; }
    double mean() const { return mean_; }
    double population_variance() const;
    double population_sd() const;

private:
    int n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// S(t) = mean over agents of expanding_sd(P_i, t), defined for t >= 1.
SDSeries system_sd_series(const SimulationTrace& trace);

// S(t) = population SD across agents of row t, defined for t >= 0.
SDSeries cross_agent_sd_series(const SimulationTrace& trace);

// S(t) = expanding_sd(C, t), defined for t >= 1.
SDSeries aggregate_sd_series(const SimulationTrace& trace);

SDSeries detection_sd_series(const SimulationTrace& trace, SdStatistic statistic);

// First differences; start_index shifts forward by one.
DerivativeSeries sd_derivative(const SDSeries& sd);

struct AlignedEnsemble {
    // Retained critical-reaching traces (pointers into the source ensemble).
    std::vector<const SimulationTrace*> traces;
    int pre_span = 0;  // every trace covers relative times [-pre_span, ...]
    int post_span = 0; // ... up to [+post_span]
    int excluded = 0;  // runs without a critical index

    // Performance row of a retained trace at relative time rel (0 == its own
    // critical index).
    std::span<const double> performances(std::size_t trace_idx, int rel) const;
    double complexity(std::size_t trace_idx, int rel) const;
};

AlignedEnsemble align_ensemble(const Ensemble& ensemble);

struct EnsembleStatistics {
    int pre_span = 0;
    int post_span = 0;
    // Indexed by rel + pre_span, rel in [-pre_span, +post_span].
    std::vector<double> mean_complexity;      // cross-run mean of C
    std::vector<double> var_complexity;       // cross-run population variance of C
    std::vector<double> mean_agent_variance;  // mean over runs of per-run
                                              // cross-agent performance variance
};

EnsembleStatistics ensemble_statistics(const AlignedEnsemble& aligned);

} // namespace crit
