#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "spotvol/rng.hpp"

using namespace spotvol;

TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Stream, SameSeedAndStreamReproduce) {
  Stream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Stream, DistinctStreamsDiffer) {
  Stream a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    same_ab += x == b();
    same_ac += x == c();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(Stream, UniformOpenIntervalAndMoments) {
  Stream s(1, 0);
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sum2 / n - std::pow(sum / n, 2), 1.0 / 12, 2e-3);
}

TEST(Stream, NormalAndExponentialMoments) {
  Stream s(2, 0);
  const int n = 200000;
  double m = 0, v = 0, e = 0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m += z;
    v += z * z;
    e += s.exponential();
  }
  EXPECT_NEAR(m / n, 0.0, 4 / std::sqrt(n));
  EXPECT_NEAR(v / n, 1.0, 4 * std::sqrt(2.0 / n));
  EXPECT_NEAR(e / n, 1.0, 4 / std::sqrt(n));
}

TEST(DeriveSeed, TagsSeparateStreams) {
  std::set<std::uint64_t> seeds;
  for (const char* tag : {"paths", "reference", "tables", "limit"}) seeds.insert(derive_seed(1, tag));
  seeds.insert(derive_seed(2, "paths"));
  EXPECT_EQ(seeds.size(), 5u);
  EXPECT_EQ(derive_seed(9, "paths"), derive_seed(9, "paths"));
  EXPECT_NE(derive_seed(9, std::uint64_t{1}), derive_seed(9, std::uint64_t{2}));
}
