#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ssiter/random.hpp"

using namespace ssiter::random;

TEST(Random, DrawsArePureFunctionsOfTheCounter) {
  const auto key = derive({1, 2, 3});
  EXPECT_EQ(uniform01(key, 17), uniform01(key, 17));
  EXPECT_EQ(standard_normal(key, 4), standard_normal(key, 4));
  EXPECT_NE(derive({1, 2, 3}), derive({1, 3, 2}));
  EXPECT_NE(derive({1, 2}), derive({1, 2, 0}));
}

TEST(Random, CounterRngMatchesDirectAddressing) {
  const auto key = derive({42});
  CounterRng rng(key);
  for (std::uint64_t i = 0; i < 10; ++i) EXPECT_EQ(rng.uniform(), uniform01(key, i));
}

TEST(Random, UniformMoments) {
  CounterRng rng(derive({7}));
  const int n = 200000;
  double sum = 0, sum_sq = 0, lo = 1, hi = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_sq += u * u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sum_sq / n - 0.25, 1.0 / 12.0, 0.002);
  EXPECT_LT(lo, 1e-4);
  EXPECT_GT(hi, 1 - 1e-4);
}

TEST(Random, NormalMoments) {
  CounterRng rng(derive({8}));
  const int n = 200000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    ASSERT_TRUE(std::isfinite(z));
    m1 += z;
    m2 += z * z;
    m3 += z * z * z;
    m4 += z * z * z * z;
  }
  EXPECT_NEAR(m1 / n, 0.0, 0.01);
  EXPECT_NEAR(m2 / n, 1.0, 0.015);
  EXPECT_NEAR(m3 / n, 0.0, 0.04);
  EXPECT_NEAR(m4 / n, 3.0, 0.08);
}

TEST(Random, BelowCoversRange) {
  CounterRng rng(derive({9}));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto k = rng.below(7);
    ASSERT_LT(k, 7u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 7u);
}
