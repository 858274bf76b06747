#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "ssiter/linalg.hpp"
#include "ssiter/random.hpp"
#include "ssiter/topology.hpp"

namespace ssiter::fixtures {

// Random normalized diagonally dominant matrix. Off-diagonal entries are
// nonzero with probability `density`, magnitudes up to `scale`; each row's
// diagonal is max(1, rowsum / ratio) with ratio drawn in (0.05, 0.995) and a
// random sign.
inline Matrix random_dominant_matrix(std::size_t n, double density, double scale, std::uint64_t seed) {
  random::CounterRng rng(random::derive({seed, 0x646f6dULL}));
  Matrix w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || rng.uniform() >= density) continue;
      w(i, j) = rng.uniform(-scale, scale);
      row += std::abs(w(i, j));
    }
    const double ratio = rng.uniform(0.05, 0.995);
    const double sign = rng.uniform() < 0.2 ? -1.0 : 1.0;
    w(i, i) = sign * std::max(1.0, row / ratio);
  }
  return w;
}

inline WeightedGraph random_dominant_graph(std::size_t n, std::uint64_t seed) {
  random::CounterRng rng(random::derive({seed, 0x67726170ULL}));
  const double density = rng.uniform(0.1, 1.0);
  const double scale = std::pow(10.0, rng.uniform(-1.0, 2.0));
  return make_graph(random_dominant_matrix(n, density, scale, seed));
}

inline Vector random_vector(std::size_t n, double lo, double hi, std::uint64_t seed) {
  random::CounterRng rng(random::derive({seed, 0x766563ULL}));
  Vector v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace ssiter::fixtures
