#pragma once

#include <cstdint>
#include <random>

namespace eitsim {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `stream`, trial `index` under a master seed. Streams
/// separate the random consumers of one trial (source, beamsplitter, each
/// detector), so adding a consumer never shifts the others.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) + index);
}

/// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform01(Rng& rng) noexcept { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace eitsim
