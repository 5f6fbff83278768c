#pragma once

#include <cstdint>

#include "ergolab/complex.hpp"

namespace ergolab {

/// SplitMix64. Used for every seeded choice in the project (fixture data,
/// sample points, random chains in tests) because its output is fully
/// specified, unlike the standard-library distributions, so seeded artifacts
/// are reproducible across compilers and platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double next_in(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        return next_u64() % n;
    }

    /// Complex with re, im uniform in [-r, r].
    cplx next_complex(double r = 1.0) {
        return cplx(next_in(-r, r), next_in(-r, r));
    }

    /// Unimodular complex with uniform argument.
    cplx next_unimodular() {
        return unit_phase(next_unit());
    }

private:
    std::uint64_t state_;
};

/// One pseudo-random bit per lattice coordinate; the lazily evaluated
/// "sample point" of the two-sided coin-flip shift space. Deterministic in
/// (seed, coordinate) so the same sample can be revisited at any window.
inline int coin_bit(std::uint64_t seed, std::int64_t coordinate) {
    std::uint64_t c = static_cast<std::uint64_t>(coordinate);
    return static_cast<int>(splitmix64(seed ^ (c * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL)) & 1ULL);
}

} // namespace ergolab
