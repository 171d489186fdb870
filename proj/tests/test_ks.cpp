#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "spotvol/error.hpp"
#include "spotvol/ks.hpp"
#include "spotvol/rng.hpp"

using namespace spotvol;

TEST(Ks, TrivialCases) {
  const std::vector<double> a{0.1, 0.2, 0.3}, b{1.0, 2.0};
  EXPECT_EQ(ks_distance(a, a), 0.0);
  EXPECT_EQ(ks_distance(a, b), 1.0);
  EXPECT_THROW(ks_distance(std::vector<double>{}, a), ParameterError);
}

TEST(Ks, ShiftedUniform) {
  Stream rng(5, 0);
  std::vector<double> u(10000);
  for (auto& x : u) x = rng.uniform();
  std::sort(u.begin(), u.end());
  std::vector<double> shifted(u);
  for (auto& x : shifted) x += 0.1;
  EXPECT_NEAR(ks_distance(u, shifted), 0.1, 0.02);
  const auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_NEAR(ks_distance(shifted, uniform_cdf), 0.1, 0.02);
  EXPECT_LT(ks_distance(u, uniform_cdf), 0.02);
}

TEST(Ks, TiesHandled) {
  const std::vector<double> a{1, 1, 1, 2}, b{1, 2, 2, 2};
  EXPECT_DOUBLE_EQ(ks_distance(a, b), 0.5);
}

TEST(Ks, PValue) {
  EXPECT_NEAR(ks_pvalue(0.0, 100), 1.0, 1e-12);
  EXPECT_LT(ks_pvalue(0.5, 100), 1e-10);
  // Asymptotic 5% critical value 1.358 / sqrt(n)
  EXPECT_NEAR(ks_pvalue(1.358 / std::sqrt(1e6), 1e6), 0.05, 0.002);
}
