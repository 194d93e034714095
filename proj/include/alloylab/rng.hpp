#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace alloylab {

// splitmix64 finalizer, used to derive well-separated substream seeds from
// (seed, tag, tag, ...) lineages.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
}

inline std::mt19937_64 make_stream(std::uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a) {
  return std::mt19937_64(mix_seed(seed, a));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return std::mt19937_64(mix_seed(mix_seed(seed, a), b));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                   std::uint64_t c) {
  return std::mt19937_64(mix_seed(mix_seed(mix_seed(seed, a), b), c));
}

// Uniform in [0,1) built from the top 53 bits of the raw output. No
// distribution objects, so streams replay bit-exactly on any platform.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Box-Muller normal deviate (two uniforms per call, deterministic).
inline double gaussian(std::mt19937_64& g) {
  double u = uniform01(g);
  while (u == 0.0) u = uniform01(g);
  const double v = uniform01(g);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

}  // namespace alloylab
