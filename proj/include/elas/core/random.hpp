#ifndef ELAS_CORE_RANDOM_HPP
#define ELAS_CORE_RANDOM_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "elas/core/types.hpp"

namespace elas {

/// All randomized code takes an explicit engine; there is no global RNG.
using Rng = std::mt19937_64;

inline Vector standard_normal(Rng& rng, Eigen::Index d) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = n01(rng);
  return z;
}

inline double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

/// Uniform random permutation of 0..n-1 (Fisher-Yates, engine-only so it is
/// reproducible across standard library implementations).
inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

/// Derives an independent stream seed from a base seed and a tag.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace elas

#endif  // ELAS_CORE_RANDOM_HPP
