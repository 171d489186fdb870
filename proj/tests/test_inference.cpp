#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "spotvol/error.hpp"
#include "spotvol/harness.hpp"
#include "spotvol/inference.hpp"
#include "spotvol/ks.hpp"
#include "spotvol/special.hpp"
#include "spotvol/stable.hpp"

using namespace spotvol;

namespace {

SpotEstimate raw_estimate(double value, double p, int k, EstimatorKind kind = EstimatorKind::first_order) {
  SpotEstimate e;
  e.value = value;
  e.p = p;
  e.kind = kind;
  e.block = BlockSpec{k, 1};
  return e;
}

SpotEstimate normalized_estimate(double value, double p, int k, double beta,
                                 EstimatorKind kind = EstimatorKind::first_order) {
  auto e = raw_estimate(value, p, k, kind);
  e.normalized = true;
  e.beta_used = beta;
  return e;
}

}  // namespace

TEST(CouplingKinds, NamesAndRegimes) {
  for (int i = 0; i < 8; ++i) {
    const auto kind = static_cast<CouplingKind>(i);
    EXPECT_EQ(coupling_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_EQ(large_k_regime(1.6, 0.6, false), CouplingKind::largek_gauss);
  EXPECT_EQ(large_k_regime(1.6, 0.8, false), CouplingKind::boundary_gauss);
  EXPECT_EQ(large_k_regime(1.6, 1.0, true), CouplingKind::largek_stable_diff);
  EXPECT_THROW(large_k_regime(1.6, 1.6, false), DomainError);
  EXPECT_THROW((CouplingLaw{CouplingKind::fixed_k_diff, 1.6, 1.0, 5}.validate()), ParameterError);
}

TEST(CouplingSample, HalfNormalAtIndexTwo) {
  const auto t = coupling_sample(CouplingLaw{CouplingKind::fixed_k_first, 2.0, 1.0, 1}, 200000, 1);
  double m = 0;
  for (const double x : t.sorted_sample()) m += x;
  m /= t.mc_size();
  const double sd = std::sqrt(1.0 - 2.0 / std::numbers::pi);
  EXPECT_NEAR(m, std::sqrt(2.0 / std::numbers::pi), 4 * sd / std::sqrt(200000.0));
}

TEST(CouplingSample, ConcentratesAtLargeK) {
  const double c = moment_constant_c(1.6, 0.6);
  const auto t = coupling_sample(CouplingLaw{CouplingKind::fixed_k_first, 1.6, 0.6, 2000}, 2000, 2);
  const auto s = t.sorted_sample();
  const auto inside = std::count_if(s.begin(), s.end(), [c](double x) { return std::abs(x / c - 1) <= 0.1; });
  EXPECT_GE(static_cast<double>(inside), 0.99 * s.size());
}

TEST(CouplingSample, DifferencedPairEqualsSingleTerm) {
  const auto t = coupling_sample(CouplingLaw{CouplingKind::fixed_k_diff, 1.6, 1.0, 2}, 100000, 3);
  Stream rng(99, 0);
  auto direct = stable_sample(StableLaw::differenced_driver(1.6), 100000, rng);
  for (auto& x : direct) x = std::abs(x);
  std::sort(direct.begin(), direct.end());
  EXPECT_GT(ks_pvalue(ks_distance(t.sorted_sample(), direct), 50000.0), 0.001);
}

TEST(CouplingSample, SortedDeterministicAndExecutionIndependent) {
  const CouplingLaw law{CouplingKind::fixed_k_first, 1.6, 1.0, 5};
  const auto a = coupling_sample(law, 50000, 7, Execution::parallel);
  const auto b = coupling_sample(law, 50000, 7, Execution::serial);
  EXPECT_TRUE(std::is_sorted(a.sorted_sample().begin(), a.sorted_sample().end()));
  EXPECT_TRUE(std::equal(a.sorted_sample().begin(), a.sorted_sample().end(), b.sorted_sample().begin()));
  EXPECT_THROW(coupling_sample(law, 0, 7), ParameterError);
}

TEST(FixedKBounds, EqualTailIsOrderStatisticLookup) {
  const auto t = coupling_sample(CouplingLaw{CouplingKind::fixed_k_first, 1.6, 1.0, 5}, 100000, 4);
  const auto s = t.sorted_sample();
  std::vector<double> rec(s.rbegin(), s.rend());
  for (auto& x : rec) x = 1.0 / x;
  const auto [lo, hi] = fixed_k_bounds(t, 0.1, BoundMethod::equal_tail);
  EXPECT_EQ(lo, rec[4999]);
  EXPECT_EQ(hi, rec[94999]);
}

TEST(FixedKBounds, HdiIsShortestAndCoversExactly) {
  const auto t = coupling_sample(CouplingLaw{CouplingKind::fixed_k_first, 1.6, 1.0, 5}, 1'000'000, 5);
  const auto s = t.sorted_sample();
  std::vector<double> rec(s.rbegin(), s.rend());
  for (auto& x : rec) x = 1.0 / x;
  const std::size_t m = 900000;
  double best = 1e300;
  for (std::size_t i = 0; i + m <= rec.size(); ++i) best = std::min(best, rec[i + m - 1] - rec[i]);
  const auto [lo, hi] = fixed_k_bounds(t, 0.1, BoundMethod::hdi);
  const auto [elo, ehi] = fixed_k_bounds(t, 0.1, BoundMethod::equal_tail);
  EXPECT_EQ(hi - lo, best);
  EXPECT_LE(hi - lo, ehi - elo);
  const auto covered = std::count_if(rec.begin(), rec.end(), [&](double x) { return lo <= x && x <= hi; });
  const double share = static_cast<double>(covered) / rec.size();
  EXPECT_GE(share, 0.9);
  EXPECT_LE(share, 0.9 + 2.0 / rec.size());
}

TEST(FixedKBounds, NarrowWithLevelAndBlockSize) {
  QuantileTableCache cache(200000, 6);
  const auto t = cache.get(CouplingLaw{CouplingKind::fixed_k_first, 1.6, 1.0, 5});
  const auto w = [&](const QuantileTable& tab, double a) {
    const auto [lo, hi] = fixed_k_bounds(tab, a, BoundMethod::hdi);
    return hi - lo;
  };
  EXPECT_LT(w(*t, 0.999), w(*t, 0.1));
  EXPECT_LT(w(*t, 0.1), w(*t, 0.01));
  double prev = 1e300;
  for (const int k : {5, 15, 30, 60}) {
    const double width = w(*cache.get(CouplingLaw{CouplingKind::fixed_k_first, 1.6, 1.0, k}), 0.1);
    EXPECT_LT(width, prev);
    prev = width;
  }
  // Pair differences use k/2 terms, so their reference law is more dispersed.
  const auto first = cache.get(CouplingLaw{CouplingKind::fixed_k_first, 1.6, 1.0, 30});
  const auto diff = cache.get(CouplingLaw{CouplingKind::fixed_k_diff, 1.6, 1.0, 30});
  const auto [flo, fhi] = fixed_k_bounds(*first, 0.1, BoundMethod::hdi);
  const auto [dlo, dhi] = fixed_k_bounds(*diff, 0.1, BoundMethod::hdi);
  EXPECT_GE(dhi / dlo, fhi / flo);
  EXPECT_THROW(fixed_k_bounds(*t, 0.0, BoundMethod::hdi), ParameterError);
  EXPECT_THROW(fixed_k_bounds(*t, 1.0, BoundMethod::hdi), ParameterError);
}

TEST(FixedKBounds, ContinuousInBeta) {
  QuantileTableCache cache(1'000'000, kDefaultTableSeed);
  const auto at = [&](double beta) {
    return fixed_k_bounds(*cache.get(CouplingLaw{CouplingKind::fixed_k_first, beta, 1.0, 15}), 0.1, BoundMethod::hdi);
  };
  const auto a = at(1.60), b = at(1.61);
  EXPECT_LT(std::abs(b.first / a.first - 1), 0.02);
  EXPECT_LT(std::abs(b.second / a.second - 1), 0.02);
}

TEST(CiFixedK, ArithmeticAndDegenerate) {
  QuantileTableCache cache(1000, 1);
  // Sample {1/4 x 500, 4 x 500}: reciprocal equal-tail bounds are (0.25, 4).
  std::vector<double> s(1000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i < 500 ? 0.25 : 4.0;
  const CouplingLaw law{CouplingKind::fixed_k_first, 1.6, 1.25, 3};
  cache.put(std::make_shared<const QuantileTable>(law, 1, s));
  auto e = raw_estimate(1.0, law.p, 3);
  const auto ci = ci_fixed_k(e, 1.6, 0.1, cache, BoundMethod::equal_tail);
  EXPECT_NEAR(ci.lo, std::pow(0.25, 1 / law.p), 1e-15);
  EXPECT_NEAR(ci.hi, std::pow(4.0, 1 / law.p), 1e-15);
  e.value = 0.0;
  const auto zero = ci_fixed_k(e, 1.6, 0.1, cache, BoundMethod::equal_tail);
  EXPECT_TRUE(zero.degenerate);
  EXPECT_EQ(zero.lo, 0.0);
  EXPECT_EQ(zero.hi, 0.0);
  EXPECT_THROW(ci_fixed_k(normalized_estimate(1.0, 1.0, 3, 1.6), 1.6, 0.1, cache), ParameterError);
}

TEST(CiFixedK, FeasibleWithExactBetaMatchesKnown) {
  QuantileTableCache cache(50000, 8);
  const auto e = raw_estimate(0.02, 1.0, 15);
  BetaEstimate b;
  b.value = 1.6;
  const auto known = ci_fixed_k(e, 1.6, 0.1, cache);
  const auto feasible = ci_fixed_k_feasible(e, b, 0.1, cache);
  EXPECT_EQ(known.lo, feasible.lo);
  EXPECT_EQ(known.hi, feasible.hi);
  b.value = 1.6012;
  EXPECT_EQ(ci_fixed_k_feasible(e, b, 0.1, cache).hi, known.hi);
  EXPECT_EQ(snap_beta(1.6026), 1.605);
}

TEST(CiLargeK, GaussianHalfWidth) {
  const double beta = 1.6, p = 0.6;
  const int k = 400;
  const double sd = std::sqrt(moment_constant_c(beta, 2 * p) / std::pow(moment_constant_c(beta, p), 2) - 1);
  for (const double v : {0.01, 3.0}) {
    const auto ci = ci_large_k_gauss(normalized_estimate(v, p, k, beta), Transform::log(), 0.05);
    EXPECT_NEAR(0.5 * (ci.hi - ci.lo), normal_quantile(0.975) * sd / std::sqrt(k), 1e-14);
    EXPECT_NEAR(0.5 * (ci.hi + ci.lo), std::log(v), 1e-14);
  }
  const auto e = normalized_estimate(1.0, p, k, beta);
  const auto a = ci_large_k_gauss(e, Transform::log(), 0.32), b = ci_large_k_gauss(e, Transform::log(), 0.05);
  EXPECT_NEAR((a.hi - a.lo) / (b.hi - b.lo), normal_quantile(0.84) / normal_quantile(0.975), 1e-12);
  EXPECT_NEAR(normal_quantile(0.84), 0.9945, 1e-4);
  const auto d = ci_large_k_gauss(normalized_estimate(1.0, p, k, beta, EstimatorKind::second_order),
                                  Transform::log(), 0.05);
  const double sd_d =
      std::sqrt(moment_constant_c_tilde(beta, 2 * p) / std::pow(moment_constant_c_tilde(beta, p), 2) - 1);
  EXPECT_NEAR(0.5 * (d.hi - d.lo), normal_quantile(0.975) * sd_d / std::sqrt(k / 2), 1e-14);
  const auto pw = ci_large_k_gauss(normalized_estimate(2.0, p, k, beta), Transform::power(0.5), 0.05);
  EXPECT_NEAR(0.5 * (pw.hi - pw.lo), normal_quantile(0.975) * sd / std::sqrt(k) * 0.5 * std::sqrt(2.0), 1e-14);
}

TEST(CiLargeK, RegimeDispatch) {
  QuantileTableCache cache(20000, 9);
  EXPECT_THROW(ci_large_k_gauss(normalized_estimate(1, 1.0, 50, 1.6), Transform::log(), 0.1), RegimeError);
  EXPECT_THROW(ci_large_k_stable(normalized_estimate(1, 0.6, 50, 1.6), Transform::log(), 0.1, cache), RegimeError);
  EXPECT_THROW(ci_boundary_gauss(normalized_estimate(1, 0.6, 50, 1.6), Transform::log(), 0.1), RegimeError);
  EXPECT_THROW(ci_large_k_gauss(raw_estimate(1, 0.6, 50), Transform::log(), 0.1), ParameterError);
}

TEST(CiLargeK, StableLimitQuantilesAndCentre) {
  QuantileTableCache cache(200000, 10);
  const double beta = 1.6, p = 1.0;
  const auto table = cache.get(CouplingLaw{CouplingKind::largek_stable, beta, p, 0});
  const auto s = table->sorted_sample();
  EXPECT_LT(s[s.size() / 2], 0.0);
  const auto [ql, qu] = limit_quantiles(*table, 0.1, BoundMethod::equal_tail);
  EXPECT_LT(ql, 0.0);
  EXPECT_GT(qu, 0.0);
  const int k = 200;
  const double v = 0.7;
  const auto ci = ci_large_k_stable(normalized_estimate(v, p, k, beta), Transform::log(), 0.1, cache);
  const double rate = std::pow(k, -(1 - p / beta));
  EXPECT_NEAR(0.5 * (ci.lo + ci.hi), std::log(v) - rate * 0.5 * (ql + qu), 1e-14);
  EXPECT_NEAR(ci.hi - ci.lo, rate * (qu - ql), 1e-14);
  const auto hdi = ci_large_k_stable(normalized_estimate(v, p, k, beta), Transform::log(), 0.1, cache, BoundMethod::hdi);
  EXPECT_LE(hdi.hi - hdi.lo, ci.hi - ci.lo + 1e-15);
}

TEST(CiLargeK, StableLimitMatchesBlockSums) {
  const auto s = run_limit_experiment(1.6, 1.0, 2000, 10000, 11);
  const auto ref = coupling_sample(CouplingLaw{CouplingKind::largek_stable, 1.6, 1.0, 0}, 500000, 12);
  EXPECT_LE(ks_distance(s.first, ref.sorted_sample()), 0.03);
}

TEST(CiBoundary, HalfWidthAndErrors) {
  const double beta = 1.6, p = 0.8;
  const int k = 1000;
  const auto ci = ci_boundary_gauss(normalized_estimate(1.0, p, k, beta), Transform::log(), 0.1);
  EXPECT_NEAR(0.5 * (ci.hi - ci.lo),
              normal_quantile(0.95) * std::sqrt(boundary_variance(beta, false) / (k * std::log(k))), 1e-14);
  const auto e = normalized_estimate(1.0, p, k, beta);
  EXPECT_THROW(ci_boundary_gauss(e, Transform::log(), 1.0), ParameterError);
  EXPECT_THROW(ci_boundary_gauss(e, Transform::log(), 0.0), ParameterError);
  EXPECT_THROW(ci_boundary_gauss(normalized_estimate(1.0, p, 1, beta), Transform::log(), 0.1), ParameterError);
}

TEST(QuantileCache, PersistsTablesOnDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "spotvol_qcache_test";
  std::filesystem::remove_all(dir);
  const CouplingLaw law{CouplingKind::fixed_k_diff, 1.6, 1.0, 6};
  QuantileTableCache first(30000, 21, dir);
  const auto a = first.get(law);
  EXPECT_TRUE(std::filesystem::exists(dir / first.file_name(law)));
  QuantileTableCache second(30000, 21, dir);
  const auto b = second.get(law);
  EXPECT_TRUE(std::equal(a->sorted_sample().begin(), a->sorted_sample().end(), b->sorted_sample().begin()));
  EXPECT_EQ(first.get(law).get(), a.get());
  const auto loaded = load_table(dir / first.file_name(law));
  ASSERT_TRUE(loaded.has_value());
  EXPECT_EQ(loaded->law().k, 6);
  std::filesystem::remove_all(dir);
}

TEST(Transform, RoundTrip) {
  const auto pw = Transform::power(0.5);
  EXPECT_NEAR(pw.inverse(pw.apply(2.3)), 2.3, 1e-15);
  EXPECT_NEAR(Transform::log().inverse(Transform::log().apply(0.01)), 0.01, 1e-17);
  EXPECT_EQ(pw.inverse(-1.0), 0.0);
  EXPECT_THROW(Transform::power(0.0), ParameterError);
}
