#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace xmes {

/// Every sampler draws from its own engine seeded through derive_seed, so a
/// replicate's stream depends only on (master seed, replicate index).
using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

inline Engine make_engine(std::uint64_t seed) { return Engine(splitmix64(seed)); }

/// Uniform on the open interval (0,1) with 53-bit resolution.
inline double open_uniform(Engine& g) {
  return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_exponential(Engine& g) { return -std::log(open_uniform(g)); }

}  // namespace xmes
