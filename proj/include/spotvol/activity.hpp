#pragma once

#include <map>
#include <string>

#include "spotvol/pathsim.hpp"

namespace spotvol {

enum class BetaMethod { threshold_count, two_scale_pv, second_diff_pv };

std::string to_string(BetaMethod m);
BetaMethod beta_method_from_string(const std::string& s);

struct BetaTuning {
  double varpi = 0.0;
  double eta = 0.0;
  double eta_prime = 0.0;
  double p = 0.0;
};

struct BetaEstimate {
  double value = 0.0;      // after clamping to [kBetaFloor, 2]
  double raw_value = 0.0;  // the statistic before clamping
  BetaMethod method = BetaMethod::second_diff_pv;
  BetaTuning tuning;
  std::map<std::string, double> diagnostics;
  bool clamped = false;
  bool degenerate = false;    // second-difference variations coincide
  bool dropped_last = false;  // odd series length, last return unused
};

inline constexpr double kBetaFloor = 0.05;
inline constexpr double kBetaCeiling = 2.0;

/// Ratio of exceedance counts at thresholds eta delta_n^varpi and
/// eta' delta_n^varpi: log(U / U') / log(eta' / eta). Thresholds are absolute,
/// so the estimate is not scale invariant.
BetaEstimate beta_threshold_count(const ReturnSeries& r, double varpi, double eta, double eta_prime);

/// Threshold-count estimator with data-scaled thresholds: eta = eta_mult * s
/// with s = median|dX| / delta_n^varpi, so the cut-offs sit at fixed multiples
/// of the median absolute return.
BetaEstimate beta_threshold_count_scaled(const ReturnSeries& r, double varpi = 0.2,
                                         double eta_mult = 8.0, double eta_prime_mult = 32.0);

/// p log 2 / (log 2 + log V(p, 2 delta_n) - log V(p, delta_n)); the coarse
/// variation sums adjacent pairs of returns.
BetaEstimate beta_two_scale_pv(const ReturnSeries& r, double p);

/// p log 2 / (log V2 - log V1) from second differences and their aggregated
/// version; insensitive to a smooth drift. Returns 0 flagged degenerate when
/// V2 == V1.
BetaEstimate beta_second_diff_pv(const ReturnSeries& r, double p);

}  // namespace spotvol
