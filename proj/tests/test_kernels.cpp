#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>
#include <vector>

#include "crit/kernels.hpp"

using namespace crit;

namespace {

std::vector<double> random_vec(std::mt19937_64& eng, std::size_t n, double lo,
                               double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = d(eng);
    return v;
}

} // namespace

TEST_CASE("scalar kernels: basic results") {
    std::vector<double> p{0.4, 0.6};
    std::vector<double> w{1.0, 1.0};
    CHECK(kern::detail::weighted_mean_scalar(p, w) == doctest::Approx(0.5));

    std::vector<double> x{1.2, -0.05, 0.37};
    kern::detail::clamp_unit_span_scalar(x);
    CHECK(x[0] == 1.0);
    CHECK(x[1] == 0.0);
    CHECK(x[2] == 0.37);

    std::vector<double> s{0.10, 0.15, 0.18};
    std::vector<double> d(2);
    kern::detail::first_diff_scalar(s, d);
    CHECK(d[0] == doctest::Approx(0.05));
    CHECK(d[1] == doctest::Approx(0.03));

    std::vector<double> v{0.001, 0.002, 0.020, 0.001};
    CHECK(kern::detail::first_above_scalar(v, 0.01) == 2);
    CHECK(kern::detail::first_above_scalar(v, 1.0) == -1);
}

#if defined(__x86_64__)
TEST_CASE("avx2 kernels match scalar reference") {
    if (!kern::backend_supported(kern::Backend::avx2)) return;

    std::mt19937_64 eng(7);
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 20u, 33u, 301u}) {
        auto p = random_vec(eng, n, 0.0, 1.0);
        auto w = random_vec(eng, n, 0.0, 2.0);
        auto gains = random_vec(eng, n, -0.1, 0.1);
        auto noise = random_vec(eng, n, -3.0, 3.0);
        auto scale = random_vec(eng, n, 0.0, 0.3);

        // Reductions agree to rounding differences of the summation order.
        CHECK(kern::detail::weighted_mean_avx2(p, w) ==
              doctest::Approx(kern::detail::weighted_mean_scalar(p, w))
                  .epsilon(1e-13));
        CHECK(kern::detail::mean_avx2(p) ==
              doctest::Approx(kern::detail::mean_scalar(p)).epsilon(1e-13));
        CHECK(kern::detail::population_sd_avx2(p) ==
              doctest::Approx(kern::detail::population_sd_scalar(p))
                  .epsilon(1e-12));

        // Element-wise kernels are bit-identical.
        auto a = p, b = p;
        kern::detail::pre_update_span_scalar(a, gains);
        kern::detail::pre_update_span_avx2(b, gains);
        CHECK(a == b);

        a = p;
        b = p;
        kern::detail::post_update_span_scalar(a, noise, scale);
        kern::detail::post_update_span_avx2(b, noise, scale);
        CHECK(a == b);

        auto c1 = random_vec(eng, n, -0.5, 1.5);
        auto c2 = c1;
        kern::detail::clamp_unit_span_scalar(c1);
        kern::detail::clamp_unit_span_avx2(c2);
        CHECK(c1 == c2);

        if (n >= 2) {
            std::vector<double> d1(n - 1), d2(n - 1);
            kern::detail::first_diff_scalar(p, d1);
            kern::detail::first_diff_avx2(p, d2);
            CHECK(d1 == d2);
        }

        for (double theta : {-1.0, 0.3, 0.9, 2.0}) {
            CHECK(kern::detail::first_above_scalar(p, theta) ==
                  kern::detail::first_above_avx2(p, theta));
        }
    }
}
#endif

TEST_CASE("backend selection") {
    const kern::Backend original = kern::active_backend();
    kern::set_backend(kern::Backend::scalar);
    CHECK(kern::active_backend() == kern::Backend::scalar);
    std::vector<double> p{0.2, 0.4, 0.9};
    std::vector<double> w{1.0, 1.0, 1.0};
    CHECK(kern::weighted_mean(p, w) == doctest::Approx(0.5));
    kern::set_backend(original);
    CHECK(kern::backend_name(kern::Backend::scalar) == "scalar");
}
