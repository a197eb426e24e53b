#include <set>

#include <gtest/gtest.h>

#include "sepcov/rng.hpp"

using namespace sepcov;

TEST(Rng, DeriveSeedIsPureAndKeySensitive) {
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
  EXPECT_NE(derive_seed(1, {0}), derive_seed(1, {0, 0}));
}

TEST(Rng, DerivedStreamsDoNotCollide) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t n = 0; n < 50; ++n)
    for (std::uint64_t rep = 0; rep < 50; ++rep) seen.insert(derive_seed(kDefaultSeed, {n, rep}));
  EXPECT_EQ(seen.size(), 2500u);
}

TEST(Rng, Uniform01Range) {
  Engine engine = make_engine(5);
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = uniform01(engine);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Rng, UniformBelowCoversRange) {
  Engine engine = make_engine(6);
  std::vector<int> counts(7, 0);
  for (int k = 0; k < 70000; ++k) {
    const auto v = uniform_below(engine, 7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (const int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Rng, StandardNormalMoments) {
  Engine engine = make_engine(7);
  double s1 = 0.0;
  double s2 = 0.0;
  double s4 = 0.0;
  const int count = 400000;
  for (int k = 0; k < count; ++k) {
    const double g = standard_normal(engine);
    s1 += g;
    s2 += g * g;
    s4 += g * g * g * g;
  }
  EXPECT_NEAR(s1 / count, 0.0, 0.01);
  EXPECT_NEAR(s2 / count, 1.0, 0.01);
  EXPECT_NEAR(s4 / count, 3.0, 0.05);
}

TEST(Rng, EngineIsReproducible) {
  Engine a = make_engine(99);
  Engine b = make_engine(99);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(a(), b());
}
