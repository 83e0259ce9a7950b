#include "crit/kernels.hpp"

#include <cmath>

namespace crit::kern::detail {

double weighted_mean_scalar(std::span<const double> p, std::span<const double> w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += w[i] * p[i];
    }
    return acc / static_cast<double>(p.size());
}

double mean_scalar(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double population_sd_scalar(std::span<const double> v) {
    const double m = mean_scalar(v);
    double acc = 0.0;
    for (double x : v) {
        const double d = x - m;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(v.size()));
}

void clamp_unit_span_scalar(std::span<double> x) {
    for (double& v : x) {
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
}

void pre_update_span_scalar(std::span<double> p, std::span<const double> gain) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        double v = p[i] + gain[i] / (1.0 + p[i]);
        p[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
}

void post_update_span_scalar(std::span<double> p, std::span<const double> noise,
                             std::span<const double> scale) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        double v = p[i] + noise[i] * scale[i];
        p[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
}

void first_diff_scalar(std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i + 1 < in.size(); ++i) {
        out[i] = in[i + 1] - in[i];
    }
}

std::ptrdiff_t first_above_scalar(std::span<const double> v, double theta) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] > theta) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
}

} // namespace crit::kern::detail
