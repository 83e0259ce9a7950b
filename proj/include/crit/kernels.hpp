// Data-parallel inner loops used by the simulation and statistics layers.
// Every kernel has a scalar reference implementation and, on x86-64 with
// AVX2, a vectorized variant selected at runtime. Element-wise kernels are
// bit-identical across backends; reductions agree to ~1e-15 relative.
#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace crit::kern {

enum class Backend {
    scalar,
    avx2,
};

// Backend active for the whole process. Defaults to the best one the CPU
// supports; tests override it to check scalar/SIMD equivalence.
Backend active_backend();
void set_backend(Backend b);
bool backend_supported(Backend b);
std::string backend_name(Backend b);

// (1/n) * sum_i w[i] * p[i]
double weighted_mean(std::span<const double> p, std::span<const double> w);

// Arithmetic mean and population standard deviation (divisor n).
double mean(std::span<const double> v);
double population_sd(std::span<const double> v);

// x[i] = clamp(x[i], 0, 1)
void clamp_unit_span(std::span<double> x);

// p[i] = clamp01(p[i] + gain[i] / (1 + p[i]))
void pre_update_span(std::span<double> p, std::span<const double> gain);

// p[i] = clamp01(p[i] + noise[i] * scale[i])
void post_update_span(std::span<double> p, std::span<const double> noise,
                      std::span<const double> scale);

// out[i] = in[i+1] - in[i]; out.size() == in.size() - 1
void first_diff(std::span<const double> in, std::span<double> out);

// Index of the first element strictly above theta, or -1.
std::ptrdiff_t first_above(std::span<const double> v, double theta);

namespace detail {
// Per-backend entry points, exposed for the equivalence tests.
double weighted_mean_scalar(std::span<const double>, std::span<const double>);
double mean_scalar(std::span<const double>);
double population_sd_scalar(std::span<const double>);
void clamp_unit_span_scalar(std::span<double>);
void pre_update_span_scalar(std::span<double>, std::span<const double>);
void post_update_span_scalar(std::span<double>, std::span<const double>,
                             std::span<const double>);
void first_diff_scalar(std::span<const double>, std::span<double>);
std::ptrdiff_t first_above_scalar(std::span<const double>, double);

#if defined(__x86_64__)
double weighted_mean_avx2(std::span<const double>, std::span<const double>);
double mean_avx2(std::span<const double>);
double population_sd_avx2(std::span<const double>);
void clamp_unit_span_avx2(std::span<double>);
void pre_update_span_avx2(std::span<double>, std::span<const double>);
void post_update_span_avx2(std::span<double>, std::span<const double>,
                           std::span<const double>);
void first_diff_avx2(std::span<const double>, std::span<double>);
std::ptrdiff_t first_above_avx2(std::span<const double>, double);
#endif
} // namespace detail

} // namespace crit::kern
