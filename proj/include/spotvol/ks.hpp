#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace spotvol {

/// sup |F_a - F_b| between the empirical CDFs of two sorted samples.
double ks_distance(std::span<const double> sorted_a, std::span<const double> sorted_b);

/// sup |F_a - F| against a continuous reference CDF.
double ks_distance(std::span<const double> sorted_a, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov p-value for statistic d with effective size
/// n_eff = n m / (n + m) (or n for the one-sample test), using Stephens'
/// small-sample correction.
double ks_pvalue(double d, double n_eff);

}  // namespace spotvol
