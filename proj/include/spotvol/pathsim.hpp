#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace spotvol {

/// Equally spaced increments of the observed price, mesh delta_n, horizon T.
struct ReturnSeries {
  std::vector<double> increments;
  double delta_n = 0.0;
  double horizon = 0.0;

  std::size_t size() const { return increments.size(); }
  double operator[](std::size_t i) const { return increments[i]; }
  void validate() const;
};

/// Two independent square-root factors, sigma^2 = V1 + V2. Rates are per
/// trading day. Defaults: a persistent factor (half-life about 2.5 months) and
/// a fast one (half-life about one day).
struct CirParams {
  double kappa1 = 0.0128;
  double theta1 = 0.4068;
  double xi1 = 0.0954;
  double kappa2 = 0.6930;
  double theta2 = 0.4068;
  double xi2 = 0.7023;

  void validate() const;
};

struct DriftSpec {
  enum class Kind { zero, constant, function };
  Kind kind = Kind::zero;
  double value = 0.0;    // constant drift, or amplitude for named functions
  std::string id;        // registry key when kind == function

  static DriftSpec zero() { return {}; }
  static DriftSpec constant(double b) { return {Kind::constant, b, {}}; }
  static DriftSpec function(std::string id, double amplitude) {
    return {Kind::function, amplitude, std::move(id)};
  }
};

struct VolSpec {
  enum class Kind { two_factor_cir, constant, function };
  Kind kind = Kind::two_factor_cir;
  CirParams cir;
  double value = 1.0;    // constant sigma, or level for named functions
  std::string id;

  static VolSpec two_factor_cir(CirParams p = {}) { return {Kind::two_factor_cir, p, 1.0, {}}; }
  static VolSpec constant(double sigma) { return {Kind::constant, {}, sigma, {}}; }
  static VolSpec function(std::string id, double level) {
    return {Kind::function, {}, level, std::move(id)};
  }
};

/// A deterministic coefficient path t -> value, parametrised by a scalar.
using CoefficientFn = std::function<double(double t, double param)>;

/// Named drift/vol functions selectable from configs ("sine", "u_shape", ...).
void register_drift_function(const std::string& id, CoefficientFn fn);
void register_vol_function(const std::string& id, CoefficientFn fn);

struct ModelConfig {
  double beta = 1.6;
  double horizon = 1.0;                // trading days
  double fine_dt = 1.0 / 23400.0;      // one second
  double obs_dt = 1.0 / 390.0;         // one minute
  DriftSpec drift;
  VolSpec vol;
  std::uint64_t seed = 20240601;
  std::uint64_t replicate = 0;

  /// Fine steps per observed return.
  std::size_t steps_per_obs() const;
  /// Number of observed returns n = horizon / obs_dt.
  std::size_t n_returns() const;
  void validate() const;
};

struct SimulatedPath {
  std::vector<double> fine_times;
  std::vector<double> x_fine;
  std::vector<double> sigma_fine;
  std::vector<double> b_fine;
  ReturnSeries returns;
  std::vector<double> sigma_at_obs;  // sigma at observation times 0, delta_n, ..., n delta_n
};

/// Euler scheme on the fine mesh: full-truncation Euler for the square-root
/// factors, X_{t+dt} = X_t + b_t dt + sigma_t dZ with dZ ~ S(beta, 0, (dt/2)^(1/beta), 0).
/// Random numbers come from three streams per replicate (Z, B1, B2).
SimulatedPath simulate_path(const ModelConfig& cfg);

/// Fine-mesh increments of X as a series (used by activity-index estimators).
ReturnSeries fine_returns(const SimulatedPath& path, double fine_dt);

/// delta_n^(1/beta) sigma_t, t on the observation grid.
double true_scaled_vol(const SimulatedPath& path, double t, double beta);

}  // namespace spotvol
