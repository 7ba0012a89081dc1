#pragma once

#include <cstdint>
#include <random>

namespace slim::rng {

// splitmix64 step; used to derive independent streams from one user seed so
// that e.g. adding noise draws never shifts the latent design draws.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
  return mix(seed ^ mix(stream));
}

inline std::mt19937_64 engine(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(derive(seed, stream));
}

} // namespace slim::rng
