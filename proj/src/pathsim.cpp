#include "spotvol/pathsim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "spotvol/error.hpp"
#include "spotvol/rng.hpp"
#include "spotvol/stable.hpp"

namespace spotvol {

namespace {

struct Registry {
  std::mutex mutex;
  std::map<std::string, CoefficientFn> drift;
  std::map<std::string, CoefficientFn> vol;

  Registry() {
    drift["sine"] = [](double t, double amp) { return amp * std::sin(2.0 * std::numbers::pi * t); };
    vol["u_shape"] = [](double t, double level) {
      return level * (1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * t));
    };
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

CoefficientFn lookup(const std::map<std::string, CoefficientFn>& table, const std::string& id,
                     const char* what) {
  const auto it = table.find(id);
  if (it == table.end()) throw ParameterError(std::string("unknown ") + what + " function '" + id + "'");
  return it->second;
}

// Integer ratio a/b, or 0 when a/b is not (numerically) a positive integer.
std::size_t integer_ratio(double a, double b) {
  const double r = a / b;
  const double rounded = std::round(r);
  if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded) return 0;
  return static_cast<std::size_t>(rounded);
}

}  // namespace

void register_drift_function(const std::string& id, CoefficientFn fn) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.drift[id] = std::move(fn);
}

void register_vol_function(const std::string& id, CoefficientFn fn) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.vol[id] = std::move(fn);
}

void ReturnSeries::validate() const {
  if (!(delta_n > 0.0)) throw ParameterError("ReturnSeries: delta_n must be positive");
  if (increments.empty()) throw ParameterError("ReturnSeries: no increments");
  if (integer_ratio(horizon, delta_n) != increments.size()) {
    throw ParameterError("ReturnSeries: horizon / delta_n must equal the number of increments");
  }
}

void CirParams::validate() const {
  for (const double v : {kappa1, theta1, xi1, kappa2, theta2, xi2}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("CirParams: all parameters must be positive");
  }
}

std::size_t ModelConfig::steps_per_obs() const { return integer_ratio(obs_dt, fine_dt); }

std::size_t ModelConfig::n_returns() const { return integer_ratio(horizon, obs_dt); }

void ModelConfig::validate() const {
  if (!(beta > 0.0 && beta < 2.0)) throw ParameterError("ModelConfig: beta must lie in (0, 2)");
  if (!(fine_dt > 0.0) || !(obs_dt > 0.0) || !(horizon > 0.0)) {
    throw ParameterError("ModelConfig: horizon and meshes must be positive");
  }
  if (steps_per_obs() == 0) {
    throw ParameterError("ModelConfig: obs_dt / fine_dt must be a positive integer");
  }
  if (n_returns() == 0) throw ParameterError("ModelConfig: horizon / obs_dt must be a positive integer");
  if (vol.kind == VolSpec::Kind::two_factor_cir) vol.cir.validate();
  if (vol.kind == VolSpec::Kind::constant && !(vol.value >= 0.0)) {
    throw ParameterError("ModelConfig: constant volatility must be non-negative");
  }
  if (vol.kind == VolSpec::Kind::function) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    lookup(r.vol, vol.id, "volatility");
  }
  if (drift.kind == DriftSpec::Kind::function) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    lookup(r.drift, drift.id, "drift");
  }
}

SimulatedPath simulate_path(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t m = cfg.steps_per_obs();
  const std::size_t n = cfg.n_returns();
  const std::size_t steps = n * m;
  const double dt = cfg.obs_dt / static_cast<double>(m);
  const double sqrt_dt = std::sqrt(dt);

  CoefficientFn drift_fn;
  CoefficientFn vol_fn;
  {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    if (cfg.drift.kind == DriftSpec::Kind::function) drift_fn = lookup(r.drift, cfg.drift.id, "drift");
    if (cfg.vol.kind == VolSpec::Kind::function) vol_fn = lookup(r.vol, cfg.vol.id, "volatility");
  }

  const std::uint64_t path_seed = derive_seed(cfg.seed, "paths");
  Stream z_rng(path_seed, 3 * cfg.replicate);
  Stream b1_rng(path_seed, 3 * cfg.replicate + 1);
  Stream b2_rng(path_seed, 3 * cfg.replicate + 2);
  const StableLaw increment_law(cfg.beta, 0.0, std::pow(0.5 * dt, 1.0 / cfg.beta), 0.0);

  SimulatedPath path;
  path.fine_times.resize(steps + 1);
  path.x_fine.resize(steps + 1);
  path.sigma_fine.resize(steps + 1);
  path.b_fine.resize(steps + 1);

  const CirParams& cir = cfg.vol.cir;
  double v1 = cir.theta1;
  double v2 = cir.theta2;

  auto sigma_at = [&](double t) {
    switch (cfg.vol.kind) {
      case VolSpec::Kind::two_factor_cir:
        return std::sqrt(std::max(v1, 0.0) + std::max(v2, 0.0));
      case VolSpec::Kind::constant:
        return cfg.vol.value;
      case VolSpec::Kind::function:
        return std::max(vol_fn(t, cfg.vol.value), 0.0);
    }
    return 0.0;
  };
  auto drift_at = [&](double t) {
    switch (cfg.drift.kind) {
      case DriftSpec::Kind::zero:
        return 0.0;
      case DriftSpec::Kind::constant:
        return cfg.drift.value;
      case DriftSpec::Kind::function:
        return drift_fn(t, cfg.drift.value);
    }
    return 0.0;
  };

  double x = 0.0;
  for (std::size_t s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    const double sigma = sigma_at(t);
    const double b = drift_at(t);
    path.fine_times[s] = t;
    path.x_fine[s] = x;
    path.sigma_fine[s] = sigma;
    path.b_fine[s] = b;
    if (s == steps) break;

    const double dz = stable_draw(increment_law, z_rng);
    x += b * dt + sigma * dz;

    if (cfg.vol.kind == VolSpec::Kind::two_factor_cir) {
      const double p1 = std::max(v1, 0.0);
      const double p2 = std::max(v2, 0.0);
      v1 += cir.kappa1 * (cir.theta1 - p1) * dt + cir.xi1 * std::sqrt(p1) * sqrt_dt * b1_rng.normal();
      v2 += cir.kappa2 * (cir.theta2 - p2) * dt + cir.xi2 * std::sqrt(p2) * sqrt_dt * b2_rng.normal();
    }
  }

  path.returns.delta_n = cfg.obs_dt;
  path.returns.horizon = static_cast<double>(n) * cfg.obs_dt;
  path.returns.increments.resize(n);
  path.sigma_at_obs.resize(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    path.returns.increments[i] = path.x_fine[(i + 1) * m] - path.x_fine[i * m];
  }
  for (std::size_t i = 0; i <= n; ++i) path.sigma_at_obs[i] = path.sigma_fine[i * m];
  return path;
}

ReturnSeries fine_returns(const SimulatedPath& path, double fine_dt) {
  if (path.x_fine.size() < 2) throw ParameterError("fine_returns: path has no fine increments");
  ReturnSeries r;
  r.delta_n = fine_dt;
  r.increments.resize(path.x_fine.size() - 1);
  for (std::size_t i = 0; i + 1 < path.x_fine.size(); ++i) {
    r.increments[i] = path.x_fine[i + 1] - path.x_fine[i];
  }
  r.horizon = static_cast<double>(r.increments.size()) * fine_dt;
  return r;
}

double true_scaled_vol(const SimulatedPath& path, double t, double beta) {
  const double delta_n = path.returns.delta_n;
  const double pos = t / delta_n;
  const double idx = std::round(pos);
  if (idx < 0.0 || std::abs(pos - idx) > 1e-9 * std::max(1.0, idx) ||
      idx >= static_cast<double>(path.sigma_at_obs.size())) {
    throw ParameterError("true_scaled_vol: t is not on the observation grid");
  }
  return std::pow(delta_n, 1.0 / beta) * path.sigma_at_obs[static_cast<std::size_t>(idx)];
}

}  // namespace spotvol
