#pragma once

#include <cstdint>
#include <random>
#include <vector>

// Seed derivation and low-discrepancy sequences. Every stochastic stage of
// the pipeline takes an explicit 64-bit seed; sub-streams are derived by
// mixing the parent seed with stream labels so that runs are reproducible and
// streams stay decorrelated regardless of evaluation order.

namespace lagsynth::rng {

// splitmix64 finalizer; bijective on 64-bit ints.
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
  return mix(mix(seed) ^ mix(stream ^ 0xa0761d6478bd642fULL));
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                            std::uint64_t b) {
  return derive(derive(seed, a), b);
}

inline std::mt19937_64 engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

// Halton sequence element for 1-based index `i` in base `base`, in (0, 1).
inline double halton(std::uint64_t i, std::uint64_t base) {
  double f = 1.0;
  double r = 0.0;
  while (i > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

// 2-D Halton points (bases 2 and 3), indices start+1 .. start+n.
inline std::vector<std::pair<double, double>> halton2d(std::size_t n,
                                                       std::uint64_t start) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    std::uint64_t i = start + k;
    pts.emplace_back(halton(i, 2), halton(i, 3));
  }
  return pts;
}

}  // namespace lagsynth::rng
