#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace saln {

// Deterministic RNG helpers. std::mt19937_64 output is fixed by the standard,
// but the std distributions are not, so draws are mapped by hand. Every run
// with the same seed produces the same stream on every platform.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Combine a base seed with stream labels (e.g. epoch and batch index) into an
/// independent-looking seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(base ^ splitmix64(a)) ^ splitmix64(b ^ 0xA5A5A5A5A5A5A5A5ULL));
}

/// Uniform double in [0, 1) using the top 53 bits of the generator output.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, bound). Modulo mapping; the bias is ~bound/2^64.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    return rng() % bound;
}

/// Standard normal via Box-Muller. Two draws per value, no cached spare, so
/// the stream position is a pure function of the call count.
inline double normal01(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    while (u1 <= 0.0) { // log(0) guard; astronomically rare
        u1 = uniform01(rng);
    }
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace saln
