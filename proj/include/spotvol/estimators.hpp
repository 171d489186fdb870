#pragma once

#include <optional>

#include "spotvol/pathsim.hpp"

namespace spotvol {

/// Block j (1-based) of k consecutive returns: indices (j-1)k+1, ..., jk,
/// covering the time interval [(j-1) k delta_n, j k delta_n).
struct BlockSpec {
  int k = 1;
  int j = 1;

  double start_time(double delta_n) const { return (j - 1) * k * delta_n; }
  double end_time(double delta_n) const { return j * k * delta_n; }
};

enum class EstimatorKind { first_order, second_order };

struct SpotEstimate {
  double value = 0.0;
  double p = 1.0;
  EstimatorKind kind = EstimatorKind::first_order;
  bool normalized = false;
  BlockSpec block;
  std::optional<double> beta_used;
};

/// Number of complete blocks of size k in the series.
int block_count(const ReturnSeries& r, int k);

/// k^-1 sum over the block of |dX|^p.
SpotEstimate estimate_fixed_k(const ReturnSeries& r, BlockSpec block, double p);

/// (2/k) sum over the k/2 return pairs of the block of |dX_{2i} - dX_{2i-1}|^p.
/// A constant drift cancels exactly in each pair.
SpotEstimate estimate_fixed_k_diff(const ReturnSeries& r, BlockSpec block, double p);

/// estimate_fixed_k / c_beta(p): consistent for sigma_{n,t}^p as k grows.
SpotEstimate estimate_large_k(const ReturnSeries& r, BlockSpec block, double p, double beta);

/// estimate_fixed_k_diff / c~_beta(p).
SpotEstimate estimate_large_k_diff(const ReturnSeries& r, BlockSpec block, double p, double beta);

/// The block whose half-open time interval contains t.
BlockSpec block_for_time(double t, int k, double delta_n, double horizon);

}  // namespace spotvol
