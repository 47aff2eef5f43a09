#pragma once

#include <cstdint>
#include <random>

namespace dpadapter {

using Rng = std::mt19937_64;

// Derives an independent stream seed from (seed, tag) so that sub-components
// of a run never share a generator. SplitMix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double normal(Rng& rng, double mean = 0.0, double std = 1.0) {
    std::normal_distribution<double> d(mean, std);
    return d(rng);
}

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(rng);
}

}  // namespace dpadapter
