#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "hurricast/common.hpp"

namespace hurricast {

/// Engine used across the toolkit. Draws are made through the helpers below
/// rather than std:: distributions so that sequences are pinned by this
/// header and not by the standard library implementation.
using Rng = std::mt19937_64;

/// Derive a stage-specific seed from a master seed and a label, so that
/// adding a stage never shifts the random streams of existing stages.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a
    for (const char c : label) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ull;
    }
    // splitmix64 finalizer over master ^ label hash
    std::uint64_t z = master ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    // modulo-free rejection to keep the draw unbiased
    const std::uint64_t limit = ~0ull - ~0ull % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
}

/// Standard normal via Box-Muller; one value per call, no retained spare.
inline double standard_normal(Rng& rng) {
    const double u1 = 1.0 - uniform01(rng); // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline double normal(Rng& rng, double mean, double stddev) {
    return mean + stddev * standard_normal(rng);
}

/// Normal restricted to (lo, hi] by rejection. stddev == 0 returns the mean
/// without consuming randomness (the mean must lie in the support).
inline double truncated_normal(Rng& rng, double mean, double stddev, double lo, double hi) {
    if (stddev == 0.0) {
        if (mean <= lo || mean > hi)
            throw DataError("truncated_normal: zero-stddev mean outside support");
        return mean;
    }
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const double x = normal(rng, mean, stddev);
        if (x > lo && x <= hi) return x;
    }
    throw NumericError("truncated_normal: rejection sampling did not terminate");
}

/// Multinomial draw: `total` items distributed over `proportions`.
inline std::vector<int> multinomial(Rng& rng, const std::vector<double>& proportions, int total) {
    std::vector<double> cumulative(proportions.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < proportions.size(); ++i) {
        acc += proportions[i];
        cumulative[i] = acc;
    }
    std::vector<int> counts(proportions.size(), 0);
    for (int n = 0; n < total; ++n) {
        const double u = uniform01(rng) * acc;
        std::size_t idx = 0;
        while (idx + 1 < cumulative.size() && u >= cumulative[idx]) ++idx;
        ++counts[idx];
    }
    return counts;
}

} // namespace hurricast
