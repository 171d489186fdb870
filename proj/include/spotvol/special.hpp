#pragma once

namespace spotvol {

/// Gamma function by the Lanczos approximation (g = 7, 9 terms); relative
/// error below 1e-13 on (0, 10]. Negative non-integer arguments use the
/// reflection formula. Poles (0, -1, -2, ...) return NaN.
double gamma_fn(double x);

double normal_cdf(double x);
double normal_pdf(double x);

/// Inverse of the standard normal CDF for prob in (0, 1).
double normal_quantile(double prob);

}  // namespace spotvol
