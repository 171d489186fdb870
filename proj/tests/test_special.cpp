#include <gtest/gtest.h>

#include <cmath>

#include "spotvol/error.hpp"
#include "spotvol/special.hpp"

using namespace spotvol;

// std::tgamma and std::erfc serve as independent oracles.
TEST(Gamma, MatchesStdTgamma) {
  for (double x = -4.75; x < 30.0; x += 0.37) {
    EXPECT_NEAR(gamma_fn(x) / std::tgamma(x), 1.0, 1e-12) << x;
  }
  EXPECT_NEAR(gamma_fn(0.5), std::sqrt(M_PI), 1e-14);
  EXPECT_DOUBLE_EQ(gamma_fn(5.0), 24.0);
}

TEST(Gamma, PolesAreNaN) {
  EXPECT_TRUE(std::isnan(gamma_fn(0.0)));
  EXPECT_TRUE(std::isnan(gamma_fn(-3.0)));
}

TEST(Normal, CdfMatchesErfc) {
  for (double x = -8; x <= 8; x += 0.25) {
    EXPECT_NEAR(normal_cdf(x), 0.5 * std::erfc(-x / std::sqrt(2.0)), 1e-15);
  }
  EXPECT_NEAR(normal_pdf(0.0), 1.0 / std::sqrt(2 * M_PI), 1e-16);
}

TEST(Normal, QuantileInvertsCdf) {
  for (const double p : {1e-10, 1e-4, 0.025, 0.05, 0.3, 0.5, 0.84, 0.95, 0.975, 1 - 1e-6}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-14 + 1e-12 * p) << p;
  }
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_THROW(normal_quantile(0.0), ParameterError);
  EXPECT_THROW(normal_quantile(1.0), ParameterError);
}
