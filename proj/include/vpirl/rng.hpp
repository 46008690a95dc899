#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace vpirl {

using RngEngine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/**
Derives an independent, reproducible random stream from a base seed and up to
three stream coordinates (typically run index, purpose tag, worker index).
The same coordinates always yield the same stream, regardless of how many
other streams were created in between.
*/
inline RngEngine make_stream(std::uint64_t base_seed, std::uint64_t a = 0,
                             std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(base_seed);
    s = splitmix64(s ^ (a * 0xd6e8feb86659fd93ULL));
    s = splitmix64(s ^ (b * 0xa5a3564e4a5a36edULL));
    s = splitmix64(s ^ (c * 0xc2b2ae3d27d4eb4fULL));
    return RngEngine(s);
}

/// Uniform double in [0, 1).
inline double uniform01(RngEngine& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Samples an index from an (unnormalized) nonnegative weight vector.
inline int sample_index(const std::vector<double>& weights, RngEngine& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw std::runtime_error("sample_index: all weights are zero");
    double u = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

} // namespace vpirl
