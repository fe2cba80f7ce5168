#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pam {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stateless hash of (seed, stream, counter); the basis for site-keyed sampling.
constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream,
                                     std::int64_t counter) noexcept {
    return mix64(mix64(seed ^ mix64(stream)) + static_cast<std::uint64_t>(counter));
}

/// Uniform double in the open interval (0, 1) from 64 random bits.
constexpr double to_unit_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Per-task random stream. Each (seed, task) pair gives an independent mt19937_64.
/// Variates are produced by inversion so that results do not depend on the
/// standard library's distribution implementations.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t task)
        : engine_(counter_hash(seed, 0x5eed, static_cast<std::int64_t>(task))) {}

    double uniform() { return to_unit_open(engine_()); }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    std::mt19937_64 engine_;
};

}  // namespace pam
