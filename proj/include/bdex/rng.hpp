#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bdex {

/// SplitMix64 step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for replica `r` of a run seeded with `seed`.
inline std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t r) noexcept {
    return splitmix64(splitmix64(seed) ^ (r * 0x632be59bd9b4e019ULL + 1));
}

/**
 * mt19937_64 with platform-independent conversions. The standard
 * distributions are implementation-defined, so the draws are done here.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0,1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0,1].
    double uniform_open_zero() noexcept { return 1.0 - uniform(); }

    double exponential(double rate) noexcept { return -std::log(uniform_open_zero()) / rate; }

    /// Unbiased integer in [0, n) (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t n) noexcept {
        std::uint64_t x = engine_();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = engine_();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace bdex
