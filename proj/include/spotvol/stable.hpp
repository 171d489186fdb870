#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "spotvol/rng.hpp"

namespace spotvol {

/// Stable law S(index, skew, scale, location) with characteristic function
///
///   index != 1:  exp{-scale^a |u|^a [1 - i skew tan(pi a / 2) sign(u)] + i location u}
///   index == 1:  exp{-scale |u| [1 + i skew (2/pi) sign(u) log|u|] + i location u}
///
/// (Nolan's 1-parametrization). At index 2 the skew is unidentifiable and is
/// stored as 0.
class StableLaw {
 public:
  StableLaw(double index, double skew, double scale, double location = 0.0);

  /// Driver increment Z_1 of the price model: cf exp(-|u|^beta / 2).
  static StableLaw driver(double beta);
  /// Difference of two independent driver increments: cf exp(-|u|^beta).
  static StableLaw differenced_driver(double beta);

  double index() const { return index_; }
  double skew() const { return skew_; }
  double scale() const { return scale_; }
  double location() const { return location_; }

  /// True when the index falls inside the band treated as exactly 1.
  bool unit_index() const;

 private:
  double index_;
  double skew_;
  double scale_;
  double location_;
};

inline constexpr double kUnitIndexBand = 1e-10;

std::complex<double> stable_cf(const StableLaw& law, double u);

/// One Chambers-Mallows-Stuck draw (Weron's form, which already targets the
/// parametrization above, so no extra centering shift is needed for index != 1).
double stable_draw(const StableLaw& law, Stream& rng);

std::vector<double> stable_sample(const StableLaw& law, std::size_t n, Stream& rng);

/// E|Z_1|^p for the driver, c_beta(p). Requires 0 < p < beta <= 2.
double moment_constant_c(double beta, double p);
/// E|Z~|^p for the differenced driver, c~_beta(p) = 2^(p/beta) c_beta(p).
double moment_constant_c_tilde(double beta, double p);

/// Scale normaliser of the totally skewed beta/p-stable limit of the
/// centred block sum (heavy-tail regime p in (beta/2, beta)).
double limit_scale_C(double beta, double p);
double limit_scale_C_tilde(double beta, double p);

/// Asymptotic variance of the boundary-case (p = beta/2) statistic normalised
/// by sqrt(k log k), or by sqrt((k/2) log(k/2)) for the differenced estimator.
double boundary_variance(double beta, bool differenced);

/// Tail constant Gamma(a) sin(pi a / 2) / pi: for S(a, 0, 1, 0),
/// P[X > x] ~ tail_constant(a) x^(-a).
double tail_constant(double index);

struct MomentConstants {
  double beta;
  double p;
  double c;
  double c_tilde;
};
MomentConstants moment_constants(double beta, double p);

struct StableLimitScale {
  double beta;
  double p;
  double C;
  double C_tilde;
};
StableLimitScale stable_limit_scale(double beta, double p);

}  // namespace spotvol
