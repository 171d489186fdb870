#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spotvol/error.hpp"
#include "spotvol/special.hpp"
#include "spotvol/stable.hpp"

using namespace spotvol;

namespace {

struct Ecf {
  double re, im, se_re, se_im;
};

Ecf empirical_cf(const std::vector<double>& xs, double u) {
  double sc = 0, sc2 = 0, ss = 0, ss2 = 0;
  for (const double x : xs) {
    const double c = std::cos(u * x), s = std::sin(u * x);
    sc += c, sc2 += c * c, ss += s, ss2 += s * s;
  }
  const double n = static_cast<double>(xs.size());
  const double mc = sc / n, ms = ss / n;
  return {mc, ms, std::sqrt((sc2 / n - mc * mc) / n), std::sqrt((ss2 / n - ms * ms) / n)};
}

void expect_cf_match(const StableLaw& law, const std::vector<double>& xs, double u, double nse) {
  const auto e = empirical_cf(xs, u);
  const auto t = stable_cf(law, u);
  EXPECT_LE(std::abs(e.re - t.real()), nse * e.se_re) << "u=" << u;
  EXPECT_LE(std::abs(e.im - t.imag()), nse * e.se_im) << "u=" << u;
}

}  // namespace

TEST(StableLaw, Validation) {
  EXPECT_THROW(StableLaw(0.0, 0, 1), ParameterError);
  EXPECT_THROW(StableLaw(2.1, 0, 1), ParameterError);
  EXPECT_THROW(StableLaw(1.5, 1.2, 1), ParameterError);
  EXPECT_THROW(StableLaw(1.5, 0, -1.0), ParameterError);
  EXPECT_NO_THROW(StableLaw(1.5, 0, 0));
  EXPECT_EQ(StableLaw(2.0, 0.7, 1).skew(), 0.0);
  EXPECT_TRUE(StableLaw(1.0 + 1e-12, 0.3, 1).unit_index());
}

TEST(StableCf, ClosedFormValues) {
  EXPECT_NEAR(std::abs(stable_cf(StableLaw(1.3, 0.4, 2.0, 1.0), 0.0) - 1.0), 0.0, 1e-15);
  const auto v = stable_cf(StableLaw::driver(1.6), 1.0);
  EXPECT_NEAR(v.real(), std::exp(-0.5), 1e-14);
  EXPECT_NEAR(v.imag(), 0.0, 1e-15);
  const StableLaw skewed(1.5, 1.0, 1.0, 0.0);
  const auto a = stable_cf(skewed, 2.0), b = stable_cf(skewed, -2.0);
  EXPECT_NEAR(a.real(), b.real(), 1e-15);
  EXPECT_NEAR(a.imag(), -b.imag(), 1e-15);
  EXPECT_NEAR(stable_cf(StableLaw::differenced_driver(1.6), 1.3).real(), std::exp(-std::pow(1.3, 1.6)), 1e-14);
}

TEST(StableSample, GaussianCase) {
  const double theta = 0.7, mu = -0.3;
  Stream rng(11, 0);
  const auto xs = stable_sample(StableLaw(2.0, 0.0, theta, mu), 400000, rng);
  double m = 0, v = 0;
  for (const double x : xs) m += x;
  m /= xs.size();
  for (const double x : xs) v += (x - m) * (x - m);
  v /= xs.size();
  const double var = 2 * theta * theta;
  EXPECT_NEAR(m, mu, 4 * std::sqrt(var / xs.size()));
  EXPECT_NEAR(v, var, 4 * var * std::sqrt(2.0 / xs.size()));
}

TEST(StableSample, SymmetricUnitScale) {
  Stream rng(12, 0);
  auto xs = stable_sample(StableLaw(1.6, 0, 1, 0), 400000, rng);
  const auto e = empirical_cf(xs, 1.0);
  EXPECT_LE(std::abs(e.re - std::exp(-1.0)), 4 * e.se_re);
  std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
  // median se ~ 1 / (2 f(0) sqrt(n)) with f(0) about 0.3
  EXPECT_NEAR(xs[xs.size() / 2], 0.0, 4 * 1.0 / (2 * 0.3 * std::sqrt(400000.0)));
}

TEST(StableSample, DriverCfWithinThreeStandardErrors) {
  const auto law = StableLaw::driver(1.6);
  Stream rng(13, 0);
  const auto xs = stable_sample(law, 1'000'000, rng);
  for (const double u : {0.5, 1.0, 2.0}) {
    const auto e = empirical_cf(xs, u);
    EXPECT_LE(std::abs(e.re - std::exp(-std::pow(u, 1.6) / 2)), 3 * e.se_re) << u;
  }
}

TEST(StableSample, SkewedLawsMatchCf) {
  for (const auto& law : {StableLaw(1.2, 0.7, 1.3, 0.4), StableLaw(0.8, -0.5, 0.6, 0.0),
                          StableLaw(1.0, 0.5, 1.0, 0.0), StableLaw(1.25, 1.0, 0.8, 0.0),
                          StableLaw(1.6, 1.0, 0.5, 0.2)}) {
    Stream rng(14, 0);
    const auto xs = stable_sample(law, 300000, rng);
    for (const double u : {-1.5, 0.3, 1.0, 2.5}) expect_cf_match(law, xs, u, 4.0);
  }
}

TEST(StableSample, EmptyRequestThrows) {
  Stream rng(1, 0);
  EXPECT_THROW(stable_sample(StableLaw::driver(1.6), 0, rng), ParameterError);
}

TEST(StableSample, TailConstant) {
  const double beta = 1.6, x = 50.0;
  Stream rng(15, 0);
  const auto law = StableLaw(beta, 0, 1, 0);
  std::size_t above = 0;
  const std::size_t n = 10'000'000;
  for (std::size_t i = 0; i < n; ++i) above += std::abs(stable_draw(law, rng)) > x;
  const double scaled = std::pow(x, beta) * static_cast<double>(above) / n;
  EXPECT_NEAR(scaled / (2 * tail_constant(beta)), 1.0, 0.1);
}

TEST(StableSample, AdditivityOfScales) {
  // Sum of two driver increments equals a driver increment scaled by 2^(1/beta).
  const double beta = 1.6;
  Stream rng(16, 0);
  const auto law = StableLaw::driver(beta);
  std::vector<double> sums(300000);
  for (auto& s : sums) s = stable_draw(law, rng) + stable_draw(law, rng);
  expect_cf_match(StableLaw(beta, 0, std::pow(2.0, 1.0 / beta) * law.scale()), sums, 0.7, 4.0);
  expect_cf_match(StableLaw::differenced_driver(beta), sums, 1.2, 4.0);
}

TEST(MomentConstants, GaussianAndIdentity) {
  EXPECT_NEAR(moment_constant_c(2.0, 1.0), std::sqrt(2.0 / std::numbers::pi), 1e-10);
  for (const double beta : {0.5, 1.0, 1.3, 1.6, 1.9}) {
    for (const double frac : {0.1, 0.3, 0.5, 0.7, 0.95}) {
      const double p = frac * beta;
      EXPECT_NEAR(moment_constant_c_tilde(beta, p) / (std::pow(2.0, p / beta) * moment_constant_c(beta, p)), 1.0,
                  1e-12);
    }
  }
  EXPECT_GT(moment_constant_c(1.6, 0.99 * 1.6), moment_constant_c(1.6, 0.9 * 1.6));
}

TEST(MomentConstants, MatchMonteCarloMeans) {
  Stream rng(17, 0);
  const auto z = stable_sample(StableLaw::driver(1.6), 2'000'000, rng);
  const auto zt = stable_sample(StableLaw::differenced_driver(1.6), 2'000'000, rng);
  auto check = [](const std::vector<double>& xs, double p, double target) {
    double s = 0, s2 = 0;
    for (const double x : xs) {
      const double v = std::pow(std::abs(x), p);
      s += v, s2 += v * v;
    }
    const double n = static_cast<double>(xs.size()), m = s / n;
    EXPECT_LE(std::abs(m - target), 3 * std::sqrt((s2 / n - m * m) / n)) << p;
  };
  check(z, 0.6, moment_constant_c(1.6, 0.6));
  // |Z|^p has infinite variance once p > beta/2; the sample se understates the error.
  auto mean_pow = [](const std::vector<double>& xs, double p) {
    double s = 0;
    for (const double x : xs) s += std::pow(std::abs(x), p);
    return s / static_cast<double>(xs.size());
  };
  EXPECT_NEAR(mean_pow(z, 1.0) / moment_constant_c(1.6, 1.0), 1.0, 0.02);
  EXPECT_NEAR(mean_pow(zt, 1.0) / moment_constant_c_tilde(1.6, 1.0), 1.0, 0.02);
}

TEST(MomentConstants, Errors) {
  EXPECT_THROW(moment_constant_c(1.6, 1.6), DomainError);
  EXPECT_THROW(moment_constant_c(1.6, 2.0), DomainError);
  EXPECT_THROW(moment_constant_c(1.6, 0.0), ParameterError);
  EXPECT_THROW(moment_constant_c(2.5, 1.0), ParameterError);
  EXPECT_THROW(moment_constant_c_tilde(1.6, 1.7), DomainError);
}

TEST(LimitScale, FiniteContinuousAndEqualForBothOrders) {
  EXPECT_TRUE(std::isfinite(limit_scale_C(1.6, 0.81)));
  EXPECT_GT(limit_scale_C(1.6, 0.81), 0.0);
  EXPECT_TRUE(std::isfinite(limit_scale_C_tilde(1.6, 1.59)));
  EXPECT_LT(std::abs(limit_scale_C(1.6, 1.0) - limit_scale_C(1.6, 1.0 + 1e-6)), 1e-3);
  for (const double beta : {1.2, 1.6, 1.9}) {
    for (const double frac : {0.55, 0.625, 0.8, 0.95}) {
      EXPECT_NEAR(limit_scale_C_tilde(beta, frac * beta) / limit_scale_C(beta, frac * beta), 1.0, 1e-12);
    }
  }
  EXPECT_THROW(limit_scale_C(1.6, 0.7), DomainError);
  EXPECT_THROW(limit_scale_C(1.6, 1.6), DomainError);
}

TEST(BoundaryVariance, RelationsAndLimit) {
  const double beta = 1.6, p = 0.8;
  const double first = boundary_variance(beta, false);
  const double diff = boundary_variance(beta, true);
  EXPECT_GT(first, 0.0);
  const double ratio = std::pow(moment_constant_c(beta, p) / moment_constant_c_tilde(beta, p), 2) * 2.0;
  EXPECT_NEAR(diff / first, ratio, 1e-12);
  EXPECT_LT(boundary_variance(1.9999, false), 1e-3);
  EXPECT_LT(boundary_variance(1.9999, false), boundary_variance(1.9, false));
}
