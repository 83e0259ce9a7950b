#include "crit/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "crit/kernels.hpp"

namespace crit {

const char* sd_statistic_name(SdStatistic s) {
    switch (s) {
    case SdStatistic::cross_agent: return "cross_agent";
    case SdStatistic::mean_agent_expanding: return "mean_agent_expanding";
    case SdStatistic::aggregate_expanding: return "aggregate_expanding";
    }
    return "unknown";
}

SdStatistic sd_statistic_from_name(const std::string& name) {
    if (name == "cross_agent") return SdStatistic::cross_agent;
    if (name == "mean_agent_expanding") return SdStatistic::mean_agent_expanding;
    if (name == "aggregate_expanding") return SdStatistic::aggregate_expanding;
    throw std::invalid_argument("unknown sd_statistic: " + name);
}

void ExpandingStat::push(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / n_;
    m2_ += delta * (x - mean_);
}

double ExpandingStat::population_variance() const {
    if (n_ == 0) return 0.0;
    return m2_ / n_;
}

double ExpandingStat::population_sd() const {
    return std::sqrt(population_variance());
}

double expanding_sd(std::span<const double> series, int t) {
    if (t < 1) throw std::invalid_argument("expanding_sd: t must be >= 1");
    if (static_cast<std::size_t>(t) >= series.size()) {
        throw std::invalid_argument("expanding_sd: t beyond series end");
    }
    ExpandingStat stat;
    for (int i = 0; i <= t; ++i) stat.push(series[static_cast<std::size_t>(i)]);
    return stat.population_sd();
}

namespace {

void require_length(const SimulationTrace& trace) {
    if (trace.performances.size() < 2) {
        throw std::invalid_argument("trace must have at least 2 time points");
    }
}

} // namespace

SDSeries system_sd_series(const SimulationTrace& trace) {
    require_length(trace);
    const std::size_t rows = trace.performances.size();
    const std::size_t n = trace.performances[0].size();

    std::vector<ExpandingStat> stats(n);
    for (std::size_t i = 0; i < n; ++i) stats[i].push(trace.performances[0][i]);

    SDSeries out;
    out.start_index = 1;
    out.values.reserve(rows - 1);
    for (std::size_t t = 1; t < rows; ++t) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            stats[i].push(trace.performances[t][i]);
            sum += stats[i].population_sd();
        }
        out.values.push_back(sum / static_cast<double>(n));
    }
    return out;
}

SDSeries cross_agent_sd_series(const SimulationTrace& trace) {
    require_length(trace);
    SDSeries out;
    out.start_index = 0;
    out.values.reserve(trace.performances.size());
    for (const auto& row : trace.performances) {
        out.values.push_back(kern::population_sd(row));
    }
    return out;
}

SDSeries aggregate_sd_series(const SimulationTrace& trace) {
    require_length(trace);
    SDSeries out;
    out.start_index = 1;
    out.values.reserve(trace.complexity.size() - 1);
    ExpandingStat stat;
    stat.push(trace.complexity[0]);
    for (std::size_t t = 1; t < trace.complexity.size(); ++t) {
        stat.push(trace.complexity[t]);
        out.values.push_back(stat.population_sd());
    }
    return out;
}

SDSeries detection_sd_series(const SimulationTrace& trace, SdStatistic statistic) {
    switch (statistic) {
    case SdStatistic::cross_agent: return cross_agent_sd_series(trace);
    case SdStatistic::mean_agent_expanding: return system_sd_series(trace);
    case SdStatistic::aggregate_expanding: return aggregate_sd_series(trace);
    }
    throw std::invalid_argument("unknown sd statistic");
}

DerivativeSeries sd_derivative(const SDSeries& sd) {
    if (sd.values.size() < 2) {
        throw std::invalid_argument("sd_derivative: need at least 2 values");
    }
    DerivativeSeries out;
    out.start_index = sd.start_index + 1;
    out.values.resize(sd.values.size() - 1);
    kern::first_diff(sd.values, out.values);
    return out;
}

std::span<const double> AlignedEnsemble::performances(std::size_t trace_idx,
                                                      int rel) const {
    const SimulationTrace& tr = *traces[trace_idx];
    const int abs_t = *tr.critical_index + rel;
    return tr.performances[static_cast<std::size_t>(abs_t)];
}

double AlignedEnsemble::complexity(std::size_t trace_idx, int rel) const {
    const SimulationTrace& tr = *traces[trace_idx];
    return tr.complexity[static_cast<std::size_t>(*tr.critical_index + rel)];
}

AlignedEnsemble align_ensemble(const Ensemble& ensemble) {
    AlignedEnsemble out;
    int pre = std::numeric_limits<int>::max();
    int post = std::numeric_limits<int>::max();
    for (const SimulationTrace& tr : ensemble.traces) {
        if (!tr.critical_index) {
            ++out.excluded;
            continue;
        }
        out.traces.push_back(&tr);
        pre = std::min(pre, *tr.critical_index);
        post = std::min(post, tr.steps() - *tr.critical_index);
    }
    if (out.traces.empty()) {
        throw std::runtime_error("align_ensemble: no trace reaches criticality");
    }
    out.pre_span = pre;
    out.post_span = post;
    return out;
}

EnsembleStatistics ensemble_statistics(const AlignedEnsemble& aligned) {
    if (aligned.traces.empty()) {
        throw std::invalid_argument("ensemble_statistics: empty alignment");
    }
    EnsembleStatistics out;
    out.pre_span = aligned.pre_span;
    out.post_span = aligned.post_span;
    const std::size_t span =
        static_cast<std::size_t>(aligned.pre_span + aligned.post_span) + 1;
    out.mean_complexity.resize(span);
    out.var_complexity.resize(span);
    out.mean_agent_variance.resize(span);

    std::vector<double> cs(aligned.traces.size());
    for (int rel = -aligned.pre_span; rel <= aligned.post_span; ++rel) {
        const std::size_t slot = static_cast<std::size_t>(rel + aligned.pre_span);
        double var_sum = 0.0;
        for (std::size_t k = 0; k < aligned.traces.size(); ++k) {
            cs[k] = aligned.complexity(k, rel);
            const double sd = kern::population_sd(aligned.performances(k, rel));
            var_sum += sd * sd;
        }
        out.mean_complexity[slot] = kern::mean(cs);
        const double sd_c = kern::population_sd(cs);
        out.var_complexity[slot] = sd_c * sd_c;
        out.mean_agent_variance[slot] = var_sum / static_cast<double>(cs.size());
    }
    return out;
}

} // namespace crit
