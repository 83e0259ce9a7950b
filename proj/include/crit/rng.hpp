#pragma once

#include <cstdint>
#include <random>

namespace crit {

// SplitMix64 finalizer; used to derive statistically independent child seeds
// from (base seed, index) tuples.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key) {
    return splitmix64(splitmix64(base) ^ splitmix64(key * 0x9e3779b97f4a7c15ULL + 1));
}

template <typename... Keys>
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key, Keys... rest) {
    return derive_seed(derive_seed(base, key), rest...);
}

// Seeded random stream owned by exactly one simulation run. Distribution
// objects are constructed per draw so each call consumes a self-contained
// slice of the engine sequence regardless of prior calls.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(engine_);
    }

    double normal(double mean, double sd) {
        std::normal_distribution<double> d(mean, sd);
        return d(engine_);
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace crit
