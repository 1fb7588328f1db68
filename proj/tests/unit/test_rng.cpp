#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "semivar/rng.hpp"
#include "test_support.hpp"

using semivar::Rng;
namespace ts = testing_support;

TEST(Rng, SplitmixKnownValue) {
  std::uint64_t state = 0;
  EXPECT_EQ(semivar::splitmix64(state), 0xE220A8397B1DCDAFULL);
}

// Straight transcription of the reference xoshiro256** step.
TEST(Rng, MatchesReferenceXoshiro) {
  std::uint64_t sm = 12345;
  std::uint64_t s[4];
  for (auto& w : s) w = semivar::splitmix64(sm);
  auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
  Rng rng(12345);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t expected = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    ASSERT_EQ(rng(), expected) << "step " << i;
  }
}

TEST(Rng, SameSeedSameStream) {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.normal(), b.normal());
    EXPECT_EQ(a.poisson(3.5), b.poisson(3.5));
  }
}

TEST(Rng, SubstreamsDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t s = 0; s < 1000; ++s) first.insert(Rng::substream(42, s)());
  EXPECT_EQ(first.size(), 1000u);
  EXPECT_NE(Rng::substream(1, 2)(), Rng::substream(2, 1)());
}

TEST(Rng, UniformRanges) {
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double o = rng.uniform_open();
    ASSERT_GT(o, 0.0);
    ASSERT_LT(o, 1.0);
    ASSERT_LT(rng.below(7), 7u);
  }
}

TEST(Rng, BelowIsUniform) {
  Rng rng(11);
  std::vector<double> counts(10, 0.0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[rng.below(10)] += 1.0;
  double stat = 0.0;
  for (double c : counts) stat += (c - n / 10.0) * (c - n / 10.0) / (n / 10.0);
  boost::math::chi_squared dist(9);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, stat)), 1e-3);
}

TEST(Rng, NormalPassesGoodnessOfFit) {
  Rng rng(5);
  std::vector<double> x(100000);
  for (auto& v : x) v = rng.normal();
  const auto r = ts::chi_square_gof(x, [](double z) { return ts::normal_cdf(z, 0.0, 1.0); }, -10, 10);
  EXPECT_GT(r.p_value, 1e-3);
}

TEST(Rng, PoissonMoments) {
  Rng rng(9);
  const int n = 200000;
  const double mean = 2.7;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<double>(rng.poisson(mean));
    s += k;
    s2 += k * k;
  }
  const double m = s / n;
  const double var = s2 / n - m * m;
  EXPECT_NEAR(m, mean, 4.0 * std::sqrt(mean / n));
  EXPECT_NEAR(var, mean, 0.05);
  EXPECT_EQ(rng.poisson(0.0), 0u);
}

TEST(Rng, GammaAndBetaMeans) {
  Rng rng(13);
  const int n = 200000;
  double g = 0.0, b = 0.0, e = 0.0;
  for (int i = 0; i < n; ++i) {
    g += rng.gamma(3.0, 0.5);
    b += rng.beta(2.0, 40.0);
    e += rng.exponential(0.25);
  }
  EXPECT_NEAR(g / n, 1.5, 4.0 * std::sqrt(0.75 / n));
  EXPECT_NEAR(b / n, 2.0 / 42.0, 4.0 * std::sqrt(2.0 * 40.0 / (42.0 * 42.0 * 43.0) / n));
  EXPECT_NEAR(e / n, 0.25, 4.0 * 0.25 / std::sqrt(n));
}
