#include "spotvol/stable.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "spotvol/error.hpp"
#include "spotvol/special.hpp"

namespace spotvol {

namespace {

constexpr double kPi = std::numbers::pi;

void require_moment_domain(double beta, double p, const char* who) {
  if (!(beta > 0.0 && beta <= 2.0)) {
    throw ParameterError(std::string(who) + ": beta must lie in (0, 2]");
  }
  if (!(p > 0.0)) throw ParameterError(std::string(who) + ": p must be positive");
  if (p >= beta) {
    throw DomainError(std::string(who) + ": p >= beta, the absolute moment is infinite");
  }
}

void require_heavy_tail_regime(double beta, double p, const char* who) {
  if (!(beta > 0.0 && beta < 2.0)) {
    throw ParameterError(std::string(who) + ": beta must lie in (0, 2)");
  }
  if (!(p > 0.5 * beta && p < beta)) {
    throw DomainError(std::string(who) + ": p must lie in (beta/2, beta)");
  }
}

// (Gamma(a) sin(pi a/2)) / (Gamma(beta) sin(pi beta/2)) with a = beta/p.
double tail_ratio(double beta, double p) {
  return tail_constant(beta / p) / tail_constant(beta);
}

}  // namespace

StableLaw::StableLaw(double index, double skew, double scale, double location)
    : index_(index), skew_(skew), scale_(scale), location_(location) {
  if (!(index > 0.0 && index <= 2.0)) throw ParameterError("StableLaw: index must lie in (0, 2]");
  if (!(skew >= -1.0 && skew <= 1.0)) throw ParameterError("StableLaw: skew must lie in [-1, 1]");
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw ParameterError("StableLaw: scale must be finite and non-negative");
  }
  if (!std::isfinite(location)) throw ParameterError("StableLaw: location must be finite");
  if (index == 2.0) skew_ = 0.0;
}

StableLaw StableLaw::driver(double beta) {
  return StableLaw(beta, 0.0, std::pow(2.0, -1.0 / beta), 0.0);
}

StableLaw StableLaw::differenced_driver(double beta) { return StableLaw(beta, 0.0, 1.0, 0.0); }

bool StableLaw::unit_index() const { return std::abs(index_ - 1.0) < kUnitIndexBand; }

std::complex<double> stable_cf(const StableLaw& law, double u) {
  if (u == 0.0) return {1.0, 0.0};
  const double a = law.index();
  const double d = law.skew();
  const double s = law.scale();
  const double sgn = u > 0.0 ? 1.0 : -1.0;
  const double au = std::abs(u);
  double re_exp;
  double im_exp;
  if (law.unit_index()) {
    re_exp = -s * au;
    im_exp = -s * au * d * (2.0 / kPi) * sgn * std::log(au) + law.location() * u;
  } else {
    const double base = std::pow(s * au, a);
    re_exp = -base;
    im_exp = base * d * std::tan(0.5 * kPi * a) * sgn + law.location() * u;
  }
  return std::exp(std::complex<double>(re_exp, im_exp));
}

double stable_draw(const StableLaw& law, Stream& rng) {
  const double a = law.index();
  const double d = law.skew();
  const double v = kPi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  if (law.unit_index()) {
    const double half_pi = 0.5 * kPi;
    const double shifted = half_pi + d * v;
    const double x =
        (2.0 / kPi) * (shifted * std::tan(v) - d * std::log(half_pi * w * std::cos(v) / shifted));
    const double s = law.scale();
    const double log_term = s > 0.0 ? (2.0 / kPi) * d * s * std::log(s) : 0.0;
    return s * x + log_term + law.location();
  }
  double x;
  if (d == 0.0) {
    x = std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
        std::pow(std::cos(v - a * v) / w, (1.0 - a) / a);
  } else {
    const double t = d * std::tan(0.5 * kPi * a);
    const double b = std::atan(t) / a;
    const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * a));
    x = s * std::sin(a * (v + b)) / std::pow(std::cos(v), 1.0 / a) *
        std::pow(std::cos(v - a * (v + b)) / w, (1.0 - a) / a);
  }
  return law.scale() * x + law.location();
}

std::vector<double> stable_sample(const StableLaw& law, std::size_t n, Stream& rng) {
  if (n == 0) throw ParameterError("stable_sample: n must be at least 1");
  std::vector<double> out(n);
  for (auto& x : out) x = stable_draw(law, rng);
  return out;
}

double moment_constant_c(double beta, double p) {
  require_moment_domain(beta, p, "moment_constant_c");
  return std::pow(2.0, p - p / beta) * gamma_fn(0.5 * (1.0 + p)) * gamma_fn(1.0 - p / beta) /
         (std::sqrt(kPi) * gamma_fn(1.0 - 0.5 * p));
}

double moment_constant_c_tilde(double beta, double p) {
  require_moment_domain(beta, p, "moment_constant_c_tilde");
  return std::pow(2.0, p) * gamma_fn(0.5 * (1.0 + p)) * gamma_fn(1.0 - p / beta) /
         (std::sqrt(kPi) * gamma_fn(1.0 - 0.5 * p));
}

double limit_scale_C(double beta, double p) {
  require_heavy_tail_regime(beta, p, "limit_scale_C");
  return moment_constant_c(beta, p) * std::pow(2.0 * tail_ratio(beta, p), p / beta);
}

double limit_scale_C_tilde(double beta, double p) {
  require_heavy_tail_regime(beta, p, "limit_scale_C_tilde");
  return moment_constant_c_tilde(beta, p) * std::pow(tail_ratio(beta, p), p / beta);
}

double tail_constant(double index) {
  return gamma_fn(index) * std::sin(0.5 * kPi * index) / kPi;
}

double boundary_variance(double beta, bool differenced) {
  if (!(beta > 0.0 && beta < 2.0)) throw ParameterError("boundary_variance: beta must lie in (0, 2)");
  // Centred |Z|^(beta/2) / c has right tail ~ A y^-2; the sqrt(k log k)-normalised
  // sum is then asymptotically N(0, A). The driver has P[|Z| > x] ~ tail_constant(beta) x^-beta,
  // the differenced driver twice that.
  if (differenced) {
    const double ct = moment_constant_c_tilde(beta, 0.5 * beta);
    return 2.0 * tail_constant(beta) / (ct * ct);
  }
  const double c = moment_constant_c(beta, 0.5 * beta);
  return tail_constant(beta) / (c * c);
}

MomentConstants moment_constants(double beta, double p) {
  return {beta, p, moment_constant_c(beta, p), moment_constant_c_tilde(beta, p)};
}

StableLimitScale stable_limit_scale(double beta, double p) {
  return {beta, p, limit_scale_C(beta, p), limit_scale_C_tilde(beta, p)};
}

}  // namespace spotvol
