#include "crit/kernels.hpp"

#include <stdexcept>

namespace crit::kern {

namespace {

Backend detect_backend() {
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#endif
    return Backend::scalar;
}

Backend g_backend = detect_backend();

} // namespace

Backend active_backend() { return g_backend; }

bool backend_supported(Backend b) {
#if defined(__x86_64__)
    if (b == Backend::avx2) return __builtin_cpu_supports("avx2");
#else
    if (b == Backend::avx2) return false;
#endif
    return true;
}

void set_backend(Backend b) {
    if (!backend_supported(b)) {
        throw std::runtime_error("kernel backend not supported on this CPU: " +
                                 backend_name(b));
    }
    g_backend = b;
}

std::string backend_name(Backend b) {
    switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    }
    return "unknown";
}

#if defined(__x86_64__)
#define CRIT_DISPATCH(fn, ...)                                    \
    (g_backend == Backend::avx2 ? detail::fn##_avx2(__VA_ARGS__)  \
                                : detail::fn##_scalar(__VA_ARGS__))
#else
#define CRIT_DISPATCH(fn, ...) detail::fn##_scalar(__VA_ARGS__)
#endif

double weighted_mean(std::span<const double> p, std::span<const double> w) {
    return CRIT_DISPATCH(weighted_mean, p, w);
}

double mean(std::span<const double> v) { return CRIT_DISPATCH(mean, v); }

double population_sd(std::span<const double> v) {
    return CRIT_DISPATCH(population_sd, v);
}

void clamp_unit_span(std::span<double> x) { CRIT_DISPATCH(clamp_unit_span, x); }

void pre_update_span(std::span<double> p, std::span<const double> gain) {
    CRIT_DISPATCH(pre_update_span, p, gain);
}

void post_update_span(std::span<double> p, std::span<const double> noise,
                      std::span<const double> scale) {
    CRIT_DISPATCH(post_update_span, p, noise, scale);
}

void first_diff(std::span<const double> in, std::span<double> out) {
    CRIT_DISPATCH(first_diff, in, out);
}

std::ptrdiff_t first_above(std::span<const double> v, double theta) {
    return CRIT_DISPATCH(first_above, v, theta);
}

#undef CRIT_DISPATCH

} // namespace crit::kern
