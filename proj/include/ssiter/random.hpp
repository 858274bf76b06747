#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, index...), so sync and async engines can sample the same
// logical input stream at different wall times, and parallel experiment
// cells reproduce bit for bit regardless of execution order.
//
// Transform: splitmix64 finalizer over a chained key; uniforms take the top
// 53 bits; standard normals use Box-Muller on two uniforms drawn at
// sub-indices 0 and 1 (cosine branch only).

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace ssiter::random {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Hash an ordered list of words into one key.
inline constexpr std::uint64_t derive(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
  return h;
}

/// Uniform in [0, 1).
inline constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform01(std::uint64_t key, std::uint64_t index) noexcept {
  return to_unit(mix64(key ^ mix64(index + 0x51ed270b27e5a3c1ULL)));
}

/// Standard normal at a counter position.
inline double standard_normal(std::uint64_t key, std::uint64_t index) noexcept {
  const double u1 = 1.0 - uniform01(key, 2 * index);  // (0, 1]
  const double u2 = uniform01(key, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Sequential view over a counter-based stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  double uniform() noexcept { return uniform01(key_, counter_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept { return standard_normal(key_, counter_++); }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound)) % bound;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ssiter::random
