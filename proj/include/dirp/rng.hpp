#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace dirp {

// splitmix64 finalizer, used to derive decorrelated substream seeds
// from one master seed so every component gets its own generator.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master ^ mix64(stream));
}

inline double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double normal(std::mt19937_64& rng, double sigma) {
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

// flat Dirichlet sample: normalized unit exponentials, lands on the simplex
inline std::vector<double> dirichlet_flat(std::mt19937_64& rng, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (auto& x : v) {
    x = -std::log(std::max(uniform01(rng), 1e-300));
    sum += x;
  }
  for (auto& x : v) x /= sum;
  return v;
}

}  // namespace dirp
