#include "spotvol/activity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "spotvol/error.hpp"

namespace spotvol {

namespace {

void finalize(BetaEstimate& est) {
  est.value = std::clamp(est.raw_value, kBetaFloor, kBetaCeiling);
  est.clamped = est.value != est.raw_value;
}

void check_power(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw ParameterError("beta estimator: p must be positive");
}

}  // namespace

std::string to_string(BetaMethod m) {
  switch (m) {
    case BetaMethod::threshold_count: return "threshold-count";
    case BetaMethod::two_scale_pv: return "two-scale-pv";
    case BetaMethod::second_diff_pv: return "second-diff-pv";
  }
  return "unknown";
}

BetaMethod beta_method_from_string(const std::string& s) {
  if (s == "threshold-count") return BetaMethod::threshold_count;
  if (s == "two-scale-pv") return BetaMethod::two_scale_pv;
  if (s == "second-diff-pv") return BetaMethod::second_diff_pv;
  throw ParameterError("unknown beta method '" + s + "'");
}

BetaEstimate beta_threshold_count(const ReturnSeries& r, double varpi, double eta, double eta_prime) {
  if (!(varpi > 0.0)) throw ParameterError("threshold count: varpi must be positive");
  if (!(eta > 0.0) || !(eta < eta_prime)) {
    throw ParameterError("threshold count: need 0 < eta < eta_prime");
  }
  const double unit = std::pow(r.delta_n, varpi);
  const double cut = eta * unit;
  const double cut_prime = eta_prime * unit;
  std::size_t count = 0;
  std::size_t count_prime = 0;
  for (const double x : r.increments) {
    const double a = std::abs(x);
    if (a > cut) ++count;
    if (a > cut_prime) ++count_prime;
  }
  BetaEstimate est;
  est.method = BetaMethod::threshold_count;
  est.tuning = {varpi, eta, eta_prime, 0.0};
  est.diagnostics = {{"count", static_cast<double>(count)},
                     {"count_prime", static_cast<double>(count_prime)},
                     {"threshold", cut},
                     {"threshold_prime", cut_prime}};
  if (count == 0 || count_prime == 0) {
    throw EstimationError("threshold count: no increments exceed a threshold, log ratio undefined");
  }
  est.raw_value = std::log(static_cast<double>(count) / static_cast<double>(count_prime)) /
                  std::log(eta_prime / eta);
  finalize(est);
  return est;
}

BetaEstimate beta_threshold_count_scaled(const ReturnSeries& r, double varpi, double eta_mult,
                                         double eta_prime_mult) {
  if (r.increments.empty()) throw ParameterError("threshold count: empty series");
  std::vector<double> abs_returns(r.size());
  std::transform(r.increments.begin(), r.increments.end(), abs_returns.begin(),
                 [](double x) { return std::abs(x); });
  const auto mid = abs_returns.begin() + static_cast<std::ptrdiff_t>(abs_returns.size() / 2);
  std::nth_element(abs_returns.begin(), mid, abs_returns.end());
  const double median = *mid;
  if (!(median > 0.0)) throw EstimationError("threshold count: median absolute return is zero");
  const double scale = median / std::pow(r.delta_n, varpi);
  BetaEstimate est = beta_threshold_count(r, varpi, eta_mult * scale, eta_prime_mult * scale);
  est.diagnostics["sample_scale"] = scale;
  return est;
}

BetaEstimate beta_two_scale_pv(const ReturnSeries& r, double p) {
  check_power(p);
  if (r.size() < 2) throw ParameterError("two-scale power variation: need at least two returns");
  BetaEstimate est;
  est.method = BetaMethod::two_scale_pv;
  est.tuning.p = p;
  const std::size_t used = r.size() / 2 * 2;
  est.dropped_last = used != r.size();
  double fine = 0.0;
  double coarse = 0.0;
  for (std::size_t i = 0; i < used; i += 2) {
    fine += std::pow(std::abs(r[i]), p) + std::pow(std::abs(r[i + 1]), p);
    coarse += std::pow(std::abs(r[i] + r[i + 1]), p);
  }
  est.diagnostics = {{"v_fine", fine}, {"v_coarse", coarse}, {"returns_used", static_cast<double>(used)}};
  if (!(fine > 0.0) || !(coarse > 0.0)) {
    throw EstimationError("two-scale power variation: a variation is zero");
  }
  const double denom = std::numbers::ln2 + std::log(coarse) - std::log(fine);
  if (denom == 0.0) throw EstimationError("two-scale power variation: zero denominator");
  est.raw_value = p * std::numbers::ln2 / denom;
  finalize(est);
  return est;
}

BetaEstimate beta_second_diff_pv(const ReturnSeries& r, double p) {
  check_power(p);
  if (r.size() < 4) throw ParameterError("second-difference power variation: need n >= 4");
  BetaEstimate est;
  est.method = BetaMethod::second_diff_pv;
  est.tuning.p = p;
  double v1 = 0.0;
  double v2 = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) v1 += std::pow(std::abs(r[i] - r[i - 1]), p);
  for (std::size_t i = 3; i < r.size(); ++i) {
    v2 += std::pow(std::abs(r[i] - r[i - 1] + r[i - 2] - r[i - 3]), p);
  }
  est.diagnostics = {{"v1", v1}, {"v2", v2}};
  if (v1 == v2) {
    est.raw_value = 0.0;
    est.value = 0.0;
    est.degenerate = true;
    return est;
  }
  if (!(v1 > 0.0) || !(v2 > 0.0)) {
    throw EstimationError("second-difference power variation: a variation is zero");
  }
  est.raw_value = p * std::numbers::ln2 / (std::log(v2) - std::log(v1));
  finalize(est);
  return est;
}

}  // namespace spotvol
