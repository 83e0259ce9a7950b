#if defined(__x86_64__)

#include "crit/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace crit::kern::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

inline __m256d clamp01(__m256d v) {
    return _mm256_min_pd(_mm256_max_pd(v, _mm256_setzero_pd()), _mm256_set1_pd(1.0));
}

} // namespace

double weighted_mean_avx2(std::span<const double> p, std::span<const double> w) {
    const std::size_t n = p.size();
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(&w[i]),
                                               _mm256_loadu_pd(&p[i])));
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += w[i] * p[i];
    return (hsum(acc) + tail) / static_cast<double>(n);
}

double mean_avx2(std::span<const double> v) {
    const std::size_t n = v.size();
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(&v[i]));
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += v[i];
    return (hsum(acc) + tail) / static_cast<double>(n);
}

double population_sd_avx2(std::span<const double> v) {
    const std::size_t n = v.size();
    const double m = mean_avx2(v);
    const __m256d mv = _mm256_set1_pd(m);
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&v[i]), mv);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = v[i] - m;
        tail += d * d;
    }
    return std::sqrt((hsum(acc) + tail) / static_cast<double>(n));
}

void clamp_unit_span_avx2(std::span<double> x) {
    std::size_t i = 0;
    for (; i + 4 <= x.size(); i += 4) {
        _mm256_storeu_pd(&x[i], clamp01(_mm256_loadu_pd(&x[i])));
    }
    for (; i < x.size(); ++i) {
        x[i] = x[i] < 0.0 ? 0.0 : (x[i] > 1.0 ? 1.0 : x[i]);
    }
}

void pre_update_span_avx2(std::span<double> p, std::span<const double> gain) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= p.size(); i += 4) {
        const __m256d pi = _mm256_loadu_pd(&p[i]);
        const __m256d gi = _mm256_loadu_pd(&gain[i]);
        const __m256d v = _mm256_add_pd(pi, _mm256_div_pd(gi, _mm256_add_pd(one, pi)));
        _mm256_storeu_pd(&p[i], clamp01(v));
    }
    for (; i < p.size(); ++i) {
        double v = p[i] + gain[i] / (1.0 + p[i]);
        p[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
}

void post_update_span_avx2(std::span<double> p, std::span<const double> noise,
                           std::span<const double> scale) {
    std::size_t i = 0;
    for (; i + 4 <= p.size(); i += 4) {
        const __m256d v = _mm256_add_pd(
            _mm256_loadu_pd(&p[i]),
            _mm256_mul_pd(_mm256_loadu_pd(&noise[i]), _mm256_loadu_pd(&scale[i])));
        _mm256_storeu_pd(&p[i], clamp01(v));
    }
    for (; i < p.size(); ++i) {
        double v = p[i] + noise[i] * scale[i];
        p[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    }
}

void first_diff_avx2(std::span<const double> in, std::span<double> out) {
    const std::size_t m = out.size();
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        _mm256_storeu_pd(&out[i], _mm256_sub_pd(_mm256_loadu_pd(&in[i + 1]),
                                                _mm256_loadu_pd(&in[i])));
    }
    for (; i < m; ++i) out[i] = in[i + 1] - in[i];
}

std::ptrdiff_t first_above_avx2(std::span<const double> v, double theta) {
    const __m256d tv = _mm256_set1_pd(theta);
    std::size_t i = 0;
    for (; i + 4 <= v.size(); i += 4) {
        const __m256d cmp = _mm256_cmp_pd(_mm256_loadu_pd(&v[i]), tv, _CMP_GT_OQ);
        const int mask = _mm256_movemask_pd(cmp);
        if (mask != 0) {
            return static_cast<std::ptrdiff_t>(i) + __builtin_ctz(static_cast<unsigned>(mask));
        }
    }
    for (; i < v.size(); ++i) {
        if (v[i] > theta) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
}

} // namespace crit::kern::detail

#endif // __x86_64__
