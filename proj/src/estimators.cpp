#include "spotvol/estimators.hpp"

#include <cmath>

#include "spotvol/error.hpp"
#include "spotvol/stable.hpp"

namespace spotvol {

namespace {

void check_block(const ReturnSeries& r, BlockSpec block) {
  if (block.k < 1 || block.j < 1) throw ParameterError("block: k and j must be positive");
  const auto last = static_cast<std::size_t>(block.j) * static_cast<std::size_t>(block.k);
  if (last > r.size()) throw ParameterError("block: index set runs past the end of the series");
}

void check_power(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw ParameterError("estimator: p must be positive");
}

double power_sum(const ReturnSeries& r, BlockSpec block, double p) {
  const std::size_t begin = static_cast<std::size_t>(block.j - 1) * block.k;
  double sum = 0.0;
  for (std::size_t i = begin; i < begin + static_cast<std::size_t>(block.k); ++i) {
    sum += std::pow(std::abs(r[i]), p);
  }
  return sum;
}

double pair_power_sum(const ReturnSeries& r, BlockSpec block, double p) {
  // Pair i (1-based) uses returns 2i-1 and 2i; pairs (j-1)k/2+1 .. (j-1)k/2+k/2.
  const std::size_t half = static_cast<std::size_t>(block.k) / 2;
  const std::size_t first_pair = static_cast<std::size_t>(block.j - 1) * half;
  double sum = 0.0;
  for (std::size_t pair = first_pair; pair < first_pair + half; ++pair) {
    sum += std::pow(std::abs(r[2 * pair + 1] - r[2 * pair]), p);
  }
  return sum;
}

}  // namespace

int block_count(const ReturnSeries& r, int k) {
  if (k < 1) throw ParameterError("block_count: k must be positive");
  return static_cast<int>(r.size() / static_cast<std::size_t>(k));
}

SpotEstimate estimate_fixed_k(const ReturnSeries& r, BlockSpec block, double p) {
  check_power(p);
  check_block(r, block);
  SpotEstimate est;
  est.value = power_sum(r, block, p) / block.k;
  est.p = p;
  est.kind = EstimatorKind::first_order;
  est.block = block;
  return est;
}

SpotEstimate estimate_fixed_k_diff(const ReturnSeries& r, BlockSpec block, double p) {
  check_power(p);
  if (block.k % 2 != 0) throw ParameterError("second-order estimator: k must be even");
  check_block(r, block);
  SpotEstimate est;
  est.value = 2.0 * pair_power_sum(r, block, p) / block.k;
  est.p = p;
  est.kind = EstimatorKind::second_order;
  est.block = block;
  return est;
}

SpotEstimate estimate_large_k(const ReturnSeries& r, BlockSpec block, double p, double beta) {
  const double c = moment_constant_c(beta, p);
  SpotEstimate est = estimate_fixed_k(r, block, p);
  est.value /= c;
  est.normalized = true;
  est.beta_used = beta;
  return est;
}

SpotEstimate estimate_large_k_diff(const ReturnSeries& r, BlockSpec block, double p, double beta) {
  const double ct = moment_constant_c_tilde(beta, p);
  SpotEstimate est = estimate_fixed_k_diff(r, block, p);
  est.value /= ct;
  est.normalized = true;
  est.beta_used = beta;
  return est;
}

BlockSpec block_for_time(double t, int k, double delta_n, double horizon) {
  if (k < 1 || !(delta_n > 0.0)) throw ParameterError("block_for_time: k and delta_n must be positive");
  if (!(t >= 0.0 && t < horizon)) throw ParameterError("block_for_time: t must lie in [0, T)");
  // Snap to the grid first so that t = j k delta_n lands in block j+1 despite rounding.
  double steps = t / delta_n;
  const double nearest = std::round(steps);
  if (std::abs(steps - nearest) < 1e-9 * std::max(1.0, nearest)) steps = nearest;
  return BlockSpec{k, static_cast<int>(std::floor(steps / k)) + 1};
}

}  // namespace spotvol
