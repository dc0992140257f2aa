#pragma once

#include <cmath>
#include <cstdint>

namespace isoscan {

// Stateless counter-based stream: each voxel hashes (seed, channel, voxel
// index) to its own draw, so worker partitioning never changes the output.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t voxel_key(std::uint64_t seed, std::uint32_t channel, std::uint32_t theta_i,
                               std::uint32_t phi_j, std::uint32_t bin_k) {
    std::uint64_t h = splitmix64(seed ^ 0x5deece66dULL);
    h = splitmix64(h ^ ((std::uint64_t(channel) << 60) | (std::uint64_t(theta_i) << 40) |
                        (std::uint64_t(phi_j) << 20) | std::uint64_t(bin_k)));
    return h;
}

/// Uniform draw in [0, 1) from a 64-bit hash.
inline double to_unit(std::uint64_t h) { return (h >> 11) * 0x1.0p-53; }

/// Unit-mean exponential draw, for speckle power fluctuation.
inline double unit_exponential(std::uint64_t h) {
    return -std::log1p(-to_unit(h));
}

} // namespace rng
} // namespace isoscan
