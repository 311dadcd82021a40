#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aoi {

/// SplitMix64 finaliser; used to derive independent stream and point seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for (base, index), e.g. one point of a parameter sweep.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return mix64(mix64(base) ^ mix64(index + 0x5DEECE66DULL));
}

enum class StreamId : std::uint64_t { Arrivals = 1, Service = 2 };

/// One reproducible random stream. mt19937_64 output is fixed by the C++
/// standard, and uniforms are built from the top 53 bits, so the variates do
/// not depend on the standard library implementation.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, StreamId id)
        : engine_(derive_seed(seed, static_cast<std::uint64_t>(id))) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Inverse-CDF exponential draw, -ln(1 - u) / rate.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    std::mt19937_64 engine_;
};

}  // namespace aoi
