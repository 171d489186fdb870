#include "spotvol/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "spotvol/error.hpp"
#include "spotvol/estimators.hpp"
#include "spotvol/io.hpp"
#include "spotvol/ks.hpp"
#include "spotvol/special.hpp"
#include "spotvol/stable.hpp"

namespace spotvol {

namespace {

constexpr const char* kVersion = "spotvol 1.0.0";

double empirical_cdf(std::span<const double> sorted, double x) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

std::vector<double> bin_density(const std::vector<double>& edges,
                                const std::function<double(double)>& cdf) {
  const std::size_t bins = edges.size() - 1;
  std::vector<double> density(bins, 0.0);
  const double mass = cdf(edges.back()) - cdf(edges.front());
  if (!(mass > 0.0)) return density;
  for (std::size_t b = 0; b < bins; ++b) {
    density[b] = (cdf(edges[b + 1]) - cdf(edges[b])) / mass / (edges[b + 1] - edges[b]);
  }
  return density;
}

// Block and target time index for the ratio comparison.
BlockSpec comparison_block(TargetConvention target, int k) {
  return BlockSpec{k, target == TargetConvention::block1_end ? 1 : 2};
}

std::size_t returns_needed(TargetConvention target, int max_k) {
  return static_cast<std::size_t>(target == TargetConvention::block1_end ? max_k : 2 * max_k);
}

ModelConfig truncated_model(const ModelConfig& base, std::uint64_t seed, std::size_t n_returns) {
  ModelConfig m = base;
  m.seed = seed;
  m.horizon = static_cast<double>(n_returns) * base.obs_dt;
  return m;
}

struct Combo {
  CoverageMethod method;
  double p;
  int k;
  CouplingKind kind;
};

}  // namespace

std::string to_string(CoverageMethod m) {
  switch (m) {
    case CoverageMethod::fixed_k: return "fixed-k";
    case CoverageMethod::fixed_k_diff: return "fixed-k-diff";
    case CoverageMethod::large_k: return "large-k";
    case CoverageMethod::large_k_diff: return "large-k-diff";
  }
  return "unknown";
}

CoverageMethod coverage_method_from_string(const std::string& s) {
  for (const auto m : {CoverageMethod::fixed_k, CoverageMethod::fixed_k_diff, CoverageMethod::large_k,
                       CoverageMethod::large_k_diff}) {
    if (to_string(m) == s) return m;
  }
  throw ParameterError("unknown coverage method '" + s + "'");
}

std::vector<int> ExperimentConfig::effective_k_list() const {
  if (!gamma) return k_list;
  const double k = std::ceil(std::pow(model.obs_dt, -*gamma) - 1e-9);
  int ki = static_cast<int>(k);
  const bool needs_even = std::any_of(methods.begin(), methods.end(), [](CoverageMethod m) {
    return m == CoverageMethod::fixed_k_diff || m == CoverageMethod::large_k_diff;
  });
  if (needs_even && ki % 2 != 0) ++ki;
  return {ki};
}

void ExperimentConfig::validate() const {
  model.validate();
  if (replications < 100) throw ParameterError("experiment: at least 100 replications are required");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("experiment: alpha must lie in (0, 1)");
  if (p_list.empty()) throw ParameterError("experiment: empty p list");
  if (gamma && !(*gamma > 0.0 && *gamma < 1.0)) throw ParameterError("experiment: gamma must lie in (0, 1)");
  const auto ks = effective_k_list();
  if (ks.empty()) throw ParameterError("experiment: empty k list");
  for (const int k : ks) {
    if (k < 1) throw ParameterError("experiment: k must be positive");
    for (const double p : p_list) {
      if (!(p > 0.0)) throw ParameterError("experiment: p must be positive");
      for (const auto m : methods) {
        const bool diff = m == CoverageMethod::fixed_k_diff || m == CoverageMethod::large_k_diff;
        if (diff && k % 2 != 0) {
          throw ParameterError("experiment: " + to_string(m) + " needs even k, got " + std::to_string(k));
        }
        if (m == CoverageMethod::large_k || m == CoverageMethod::large_k_diff) {
          const auto kind = large_k_regime(model.beta, p, diff);
          const int terms = diff ? k / 2 : k;
          if ((kind == CouplingKind::boundary_gauss || kind == CouplingKind::boundary_gauss_diff) &&
              terms < 2) {
            throw ParameterError("experiment: boundary interval needs at least two terms");
          }
        }
      }
    }
  }
}

std::vector<double> freedman_diaconis_edges(std::vector<double> pooled) {
  if (pooled.size() < 2) throw ParameterError("histogram: need at least two points");
  std::sort(pooled.begin(), pooled.end());
  const std::size_t n = pooled.size();
  const double lo = pooled[quantile_index(n, 0.005)];
  const double hi = pooled[quantile_index(n, 0.995)];
  const double iqr = pooled[quantile_index(n, 0.75)] - pooled[quantile_index(n, 0.25)];
  const double h = 2.0 * iqr / std::cbrt(static_cast<double>(n));
  std::size_t bins = 10;
  if (h > 0.0 && hi > lo) {
    bins = static_cast<std::size_t>(std::clamp(std::ceil((hi - lo) / h), 10.0, 200.0));
  }
  const double top = hi > lo ? hi : lo + 1.0;
  std::vector<double> edges(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    edges[b] = lo + (top - lo) * static_cast<double>(b) / static_cast<double>(bins);
  }
  return edges;
}

std::vector<HistogramComparison> run_histogram_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto ks = cfg.effective_k_list();
  const int max_k = *std::max_element(ks.begin(), ks.end());
  const double beta = cfg.model.beta;
  const ModelConfig model = truncated_model(cfg.model, cfg.seed, returns_needed(cfg.target, max_k));
  const std::size_t np = cfg.p_list.size();
  const std::size_t reps = cfg.replications;

  std::vector<std::vector<double>> ratios(ks.size() * np, std::vector<double>(reps));
  for_each_index(reps, cfg.execution, [&](std::size_t r) {
    ModelConfig m = model;
    m.replicate += r;
    const SimulatedPath path = simulate_path(m);
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const int k = ks[ki];
      const double sigma_nt = true_scaled_vol(path, k * model.obs_dt, beta);
      for (std::size_t pi = 0; pi < np; ++pi) {
        const double p = cfg.p_list[pi];
        const auto est = estimate_fixed_k(path.returns, comparison_block(cfg.target, k), p);
        ratios[ki * np + pi][r] = est.value / std::pow(sigma_nt, p);
      }
    }
  });

  const std::uint64_t ref_seed = derive_seed(cfg.seed, "reference");
  std::vector<HistogramComparison> out;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    const int k = ks[ki];
    for (std::size_t pi = 0; pi < np; ++pi) {
      const double p = cfg.p_list[pi];
      auto& finite = ratios[ki * np + pi];
      std::sort(finite.begin(), finite.end());

      HistogramComparison h;
      h.p = p;
      h.k = k;
      h.beta = beta;
      h.replications = reps;

      const QuantileTable fixed = coupling_sample(CouplingLaw{CouplingKind::fixed_k_first, beta, p, k},
                                                  cfg.reference_draws, ref_seed, cfg.execution);
      h.ks_fixed = ks_distance(finite, fixed.sorted_sample());

      const double c = moment_constant_c(beta, p);
      h.large_k_law = large_k_regime(beta, p, false);
      std::function<double(double)> large_cdf;
      std::vector<double> large_sample;
      if (h.large_k_law == CouplingKind::largek_stable) {
        const QuantileTable limit =
            coupling_sample(CouplingLaw{h.large_k_law, beta, p, 0}, cfg.reference_draws, ref_seed, cfg.execution);
        const double rate = std::pow(static_cast<double>(k), -(1.0 - p / beta));
        large_sample.reserve(limit.mc_size());
        for (const double z : limit.sorted_sample()) large_sample.push_back(c * (1.0 + rate * z));
        h.ks_large = ks_distance(finite, large_sample);
        large_cdf = [&large_sample](double x) { return empirical_cdf(large_sample, x); };
      } else {
        double scale;
        if (h.large_k_law == CouplingKind::largek_gauss) {
          scale = std::sqrt((moment_constant_c(beta, 2.0 * p) / (c * c) - 1.0) / k);
        } else {
          scale = std::sqrt(boundary_variance(beta, false) / (k * std::log(static_cast<double>(k))));
        }
        large_cdf = [c, scale](double x) { return normal_cdf((x / c - 1.0) / scale); };
        h.ks_large = ks_distance(finite, large_cdf);
      }

      std::vector<double> pooled(finite.begin(), finite.end());
      pooled.insert(pooled.end(), fixed.sorted_sample().begin(), fixed.sorted_sample().end());
      pooled.insert(pooled.end(), large_sample.begin(), large_sample.end());
      h.bin_edges = freedman_diaconis_edges(std::move(pooled));
      h.finite_sample_density = bin_density(h.bin_edges, [&](double x) { return empirical_cdf(finite, x); });
      h.fixed_k_limit_density =
          bin_density(h.bin_edges, [&](double x) { return empirical_cdf(fixed.sorted_sample(), x); });
      h.large_k_limit_density = bin_density(h.bin_edges, large_cdf);
      out.push_back(std::move(h));
    }
  }
  return out;
}

std::vector<CoverageReport> run_coverage_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto ks = cfg.effective_k_list();
  const int max_k = *std::max_element(ks.begin(), ks.end());
  const double beta = cfg.model.beta;
  const ModelConfig model = truncated_model(cfg.model, cfg.seed, returns_needed(cfg.target, max_k));

  std::vector<Combo> combos;
  for (const auto m : cfg.methods) {
    const bool diff = m == CoverageMethod::fixed_k_diff || m == CoverageMethod::large_k_diff;
    for (const double p : cfg.p_list) {
      for (const int k : ks) {
        CouplingKind kind;
        if (m == CoverageMethod::fixed_k) kind = CouplingKind::fixed_k_first;
        else if (m == CoverageMethod::fixed_k_diff) kind = CouplingKind::fixed_k_diff;
        else kind = large_k_regime(beta, p, diff);
        combos.push_back({m, p, k, kind});
      }
    }
  }

  QuantileTableCache cache(cfg.table_size, derive_seed(cfg.seed, "tables"), std::nullopt, cfg.execution);
  for (const auto& c : combos) {
    if (is_fixed_k(c.kind)) cache.get(CouplingLaw{c.kind, beta, c.p, c.k});
    if (c.kind == CouplingKind::largek_stable || c.kind == CouplingKind::largek_stable_diff) {
      cache.get(CouplingLaw{c.kind, beta, c.p, 0});
    }
  }

  const std::size_t reps = cfg.replications;
  std::vector<std::vector<char>> covered(combos.size(), std::vector<char>(reps));
  std::vector<std::vector<double>> widths(combos.size(), std::vector<double>(reps));
  for_each_index(reps, cfg.execution, [&](std::size_t r) {
    ModelConfig m = model;
    m.replicate += r;
    const SimulatedPath path = simulate_path(m);
    for (std::size_t ci_idx = 0; ci_idx < combos.size(); ++ci_idx) {
      const auto& c = combos[ci_idx];
      const BlockSpec block = comparison_block(cfg.target, c.k);
      const double sigma_nt = true_scaled_vol(path, c.k * model.obs_dt, beta);
      ConfidenceInterval ci;
      switch (c.method) {
        case CoverageMethod::fixed_k:
          ci = ci_fixed_k(estimate_fixed_k(path.returns, block, c.p), beta, cfg.alpha, cache, cfg.fixed_bounds);
          break;
        case CoverageMethod::fixed_k_diff:
          ci = ci_fixed_k(estimate_fixed_k_diff(path.returns, block, c.p), beta, cfg.alpha, cache,
                          cfg.fixed_bounds);
          break;
        case CoverageMethod::large_k:
        case CoverageMethod::large_k_diff: {
          const SpotEstimate est = c.method == CoverageMethod::large_k
                                       ? estimate_large_k(path.returns, block, c.p, beta)
                                       : estimate_large_k_diff(path.returns, block, c.p, beta);
          if (c.kind == CouplingKind::largek_gauss || c.kind == CouplingKind::largek_gauss_diff) {
            ci = ci_large_k_gauss(est, cfg.f, cfg.alpha);
          } else if (c.kind == CouplingKind::largek_stable || c.kind == CouplingKind::largek_stable_diff) {
            ci = ci_large_k_stable(est, cfg.f, cfg.alpha, cache, cfg.stable_split);
          } else {
            ci = ci_boundary_gauss(est, cfg.f, cfg.alpha);
          }
          break;
        }
      }
      covered[ci_idx][r] = ci.covers_sigma(sigma_nt) ? 1 : 0;
      widths[ci_idx][r] = ci.sigma_hi - ci.sigma_lo;
    }
  });

  std::vector<CoverageReport> out;
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const auto& c = combos[i];
    CoverageReport rep;
    rep.method = to_string(c.method) + "/" + to_string(c.kind);
    rep.p = c.p;
    rep.k = c.k;
    rep.nominal = 1.0 - cfg.alpha;
    rep.replications = reps;
    const double hits = std::accumulate(covered[i].begin(), covered[i].end(), 0.0);
    rep.empirical = hits / static_cast<double>(reps);
    rep.mc_se = std::sqrt(rep.empirical * (1.0 - rep.empirical) / static_cast<double>(reps));
    rep.mean_width = std::accumulate(widths[i].begin(), widths[i].end(), 0.0) / static_cast<double>(reps);
    out.push_back(rep);
  }
  return out;
}

FeasibleReport run_feasible_experiment(const FeasibleConfig& cfg) {
  cfg.model.validate();
  const double beta = cfg.model.beta;
  const std::size_t n = cfg.model.n_returns();
  const int blocks = static_cast<int>(n / static_cast<std::size_t>(cfg.k));
  if (blocks < 1) throw ParameterError("feasible experiment: horizon shorter than one block");
  const std::size_t reps = cfg.replications;

  QuantileTableCache cache(cfg.table_size, cfg.table_seed, std::nullopt, cfg.execution);
  cache.get(CouplingLaw{CouplingKind::fixed_k_first, beta, cfg.p, cfg.k});

  std::vector<double> beta_hat(reps);
  std::vector<char> agree(reps);
  std::vector<int> hits_known(reps);
  std::vector<int> hits_feasible(reps);
  for_each_index(reps, cfg.execution, [&](std::size_t r) {
    ModelConfig m = cfg.model;
    m.replicate += r;
    const SimulatedPath path = simulate_path(m);
    const ReturnSeries fine = fine_returns(path, cfg.model.obs_dt / static_cast<double>(cfg.model.steps_per_obs()));
    BetaEstimate bh;
    switch (cfg.beta_method) {
      case BetaMethod::threshold_count: bh = beta_threshold_count_scaled(fine); break;
      case BetaMethod::two_scale_pv: bh = beta_two_scale_pv(fine, cfg.beta_p); break;
      case BetaMethod::second_diff_pv: bh = beta_second_diff_pv(fine, cfg.beta_p); break;
    }
    beta_hat[r] = bh.value;
    int known = 0;
    int feasible = 0;
    for (int j = 1; j <= blocks; ++j) {
      const auto est = estimate_fixed_k(path.returns, BlockSpec{cfg.k, j}, cfg.p);
      const double sigma_nt = true_scaled_vol(path, j * cfg.k * cfg.model.obs_dt, beta);
      const auto ci_known = ci_fixed_k(est, beta, cfg.alpha, cache);
      const auto ci_feas = ci_fixed_k_feasible(est, bh, cfg.alpha, cache);
      known += ci_known.covers_sigma(sigma_nt);
      feasible += ci_feas.covers_sigma(sigma_nt);
      if (j == 1) {
        const double change = std::max(std::abs(ci_feas.lo / ci_known.lo - 1.0),
                                        std::abs(ci_feas.hi / ci_known.hi - 1.0));
        agree[r] = change < cfg.endpoint_tolerance;
      }
    }
    hits_known[r] = known;
    hits_feasible[r] = feasible;
  });

  FeasibleReport rep;
  rep.intervals = reps * static_cast<std::size_t>(blocks);
  const double total = static_cast<double>(rep.intervals);
  rep.coverage_known = std::accumulate(hits_known.begin(), hits_known.end(), 0.0) / total;
  rep.coverage_feasible = std::accumulate(hits_feasible.begin(), hits_feasible.end(), 0.0) / total;
  rep.mc_se = std::sqrt(rep.coverage_feasible * (1.0 - rep.coverage_feasible) / total);
  rep.endpoint_agreement = std::accumulate(agree.begin(), agree.end(), 0.0) / static_cast<double>(reps);
  std::vector<double> errors(reps);
  for (std::size_t r = 0; r < reps; ++r) errors[r] = std::abs(beta_hat[r] - beta);
  rep.median_beta_error = median_of(errors);
  rep.beta_hat = std::move(beta_hat);
  return rep;
}

std::vector<BetaStudy> run_beta_experiment(const BetaStudyConfig& cfg) {
  cfg.model.validate();
  const std::size_t reps = cfg.replications;
  const double fine_dt = cfg.model.obs_dt / static_cast<double>(cfg.model.steps_per_obs());
  std::vector<BetaStudy> out = {{BetaMethod::threshold_count, std::vector<double>(reps), 0.0},
                                {BetaMethod::two_scale_pv, std::vector<double>(reps), 0.0},
                                {BetaMethod::second_diff_pv, std::vector<double>(reps), 0.0}};
  for_each_index(reps, cfg.execution, [&](std::size_t r) {
    ModelConfig m = cfg.model;
    m.replicate += r;
    const ReturnSeries fine = fine_returns(simulate_path(m), fine_dt);
    auto guarded = [](auto&& fn) {
      try {
        return fn().raw_value;
      } catch (const EstimationError&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    out[0].estimates[r] =
        guarded([&] { return beta_threshold_count_scaled(fine, cfg.varpi, cfg.eta_mult, cfg.eta_prime_mult); });
    out[1].estimates[r] = guarded([&] { return beta_two_scale_pv(fine, cfg.pv_power); });
    out[2].estimates[r] = guarded([&] { return beta_second_diff_pv(fine, cfg.pv_power); });
  });
  for (auto& study : out) {
    std::vector<double> errors(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      const double e = std::abs(study.estimates[r] - cfg.model.beta);
      errors[r] = std::isnan(e) ? std::numeric_limits<double>::infinity() : e;
    }
    study.median_abs_error = median_of(std::move(errors));
  }
  return out;
}

LimitSample run_limit_experiment(double beta, double p, int k, std::size_t replications,
                                 std::uint64_t seed, Execution exec) {
  if (k < 4 || k % 2 != 0) throw ParameterError("limit experiment: k must be even and at least 4");
  LimitSample out;
  out.first_kind = large_k_regime(beta, p, false);
  out.diff_kind = large_k_regime(beta, p, true);
  const double c = moment_constant_c(beta, p);
  const double ct = moment_constant_c_tilde(beta, p);
  const double kf = static_cast<double>(k);
  const double half = 0.5 * kf;
  double norm_first;
  double norm_diff;
  switch (out.first_kind) {
    case CouplingKind::largek_gauss:
      norm_first = std::sqrt(kf);
      norm_diff = std::sqrt(half);
      break;
    case CouplingKind::boundary_gauss:
      norm_first = std::sqrt(kf * std::log(kf));
      norm_diff = std::sqrt(half * std::log(half));
      break;
    default:
      norm_first = std::pow(kf, p / beta);
      norm_diff = std::pow(half, p / beta);
      break;
  }
  const StableLaw driver = StableLaw::driver(beta);
  const std::uint64_t stream_seed = derive_seed(seed, "limit");
  out.first.resize(replications);
  out.diff.resize(replications);
  for_each_index(replications, exec, [&](std::size_t r) {
    Stream rng(stream_seed, r);
    double sum_first = 0.0;
    double sum_diff = 0.0;
    for (int i = 0; i < k; i += 2) {
      const double z1 = stable_draw(driver, rng);
      const double z2 = stable_draw(driver, rng);
      sum_first += std::pow(std::abs(z1), p) / c - 1.0;
      sum_first += std::pow(std::abs(z2), p) / c - 1.0;
      sum_diff += std::pow(std::abs(z2 - z1), p) / ct - 1.0;
    }
    out.first[r] = sum_first / norm_first;
    out.diff[r] = sum_diff / norm_diff;
  });
  std::sort(out.first.begin(), out.first.end());
  std::sort(out.diff.begin(), out.diff.end());
  return out;
}

void write_histogram_csv(const std::filesystem::path& file, const HistogramComparison& h) {
  std::ofstream out(file);
  if (!out) throw ParameterError("cannot write " + file.string());
  out << "bin_left,bin_right,finite,fixed_k,large_k\n";
  for (std::size_t b = 0; b + 1 < h.bin_edges.size(); ++b) {
    out << format_double(h.bin_edges[b]) << ',' << format_double(h.bin_edges[b + 1]) << ','
        << format_double(h.finite_sample_density[b]) << ',' << format_double(h.fixed_k_limit_density[b])
        << ',' << format_double(h.large_k_limit_density[b]) << '\n';
  }
}

void write_ks_table(const std::filesystem::path& file, const std::vector<HistogramComparison>& hs) {
  std::ofstream out(file);
  if (!out) throw ParameterError("cannot write " + file.string());
  out << "p,k,beta,replications,large_k_law,ks_fixed,ks_large\n";
  for (const auto& h : hs) {
    out << format_double(h.p) << ',' << h.k << ',' << format_double(h.beta) << ',' << h.replications << ','
        << to_string(h.large_k_law) << ',' << format_double(h.ks_fixed) << ',' << format_double(h.ks_large)
        << '\n';
  }
}

void write_coverage_csv(const std::filesystem::path& file, const std::vector<CoverageReport>& rs) {
  std::ofstream out(file);
  if (!out) throw ParameterError("cannot write " + file.string());
  out << "method,p,k,nominal,empirical,mc_se,mean_width,replications\n";
  for (const auto& r : rs) {
    out << r.method << ',' << format_double(r.p) << ',' << r.k << ',' << format_double(r.nominal) << ','
        << format_double(r.empirical) << ',' << format_double(r.mc_se) << ',' << format_double(r.mean_width)
        << ',' << r.replications << '\n';
  }
}

void write_histogram_outputs(const std::filesystem::path& dir, const std::vector<HistogramComparison>& hs) {
  std::filesystem::create_directories(dir);
  for (const auto& h : hs) {
    write_histogram_csv(dir / ("histograms_" + format_double(h.p) + "_" + std::to_string(h.k) + ".csv"), h);
  }
  write_ks_table(dir / "ks_table.csv", hs);
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto m : cfg.methods) methods.push_back(to_string(m));
  nlohmann::json j = {
      {"model", cfg.model},
      {"p_list", cfg.p_list},
      {"k_list", cfg.k_list},
      {"alpha", cfg.alpha},
      {"replications", cfg.replications},
      {"methods", methods},
      {"seed", cfg.seed},
      {"target", cfg.target == TargetConvention::block1_end ? "block1_end" : "block2_start"},
      {"reference_draws", cfg.reference_draws},
      {"table_size", cfg.table_size},
      {"fixed_bounds", to_string(cfg.fixed_bounds)},
      {"stable_split", to_string(cfg.stable_split)},
      {"transform", cfg.f.kind == Transform::Kind::log ? "log" : "power"},
      {"transform_r", cfg.f.r},
  };
  j["gamma"] = cfg.gamma ? nlohmann::json(*cfg.gamma) : nlohmann::json(nullptr);
  return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("model")) cfg.model = j.at("model").get<ModelConfig>();
  cfg.p_list = j.value("p_list", cfg.p_list);
  cfg.k_list = j.value("k_list", cfg.k_list);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.replications = j.value("replications", cfg.replications);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.reference_draws = j.value("reference_draws", cfg.reference_draws);
  cfg.table_size = j.value("table_size", cfg.table_size);
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : j.at("methods")) cfg.methods.push_back(coverage_method_from_string(m.get<std::string>()));
  }
  if (j.contains("target")) {
    const auto t = j.at("target").get<std::string>();
    if (t == "block1_end") cfg.target = TargetConvention::block1_end;
    else if (t == "block2_start") cfg.target = TargetConvention::block2_start;
    else throw ParameterError("unknown target convention '" + t + "'");
  }
  if (j.contains("fixed_bounds")) cfg.fixed_bounds = bound_method_from_string(j.at("fixed_bounds").get<std::string>());
  if (j.contains("stable_split")) cfg.stable_split = bound_method_from_string(j.at("stable_split").get<std::string>());
  if (j.contains("transform")) {
    const auto t = j.at("transform").get<std::string>();
    cfg.f = t == "power" ? Transform::power(j.value("transform_r", 1.0)) : Transform::log();
  }
  if (j.contains("gamma") && !j.at("gamma").is_null()) cfg.gamma = j.at("gamma").get<double>();
  return cfg;
}

void write_manifest(const std::filesystem::path& file, const ExperimentConfig& cfg,
                    const std::string& experiment) {
  nlohmann::json j = {{"experiment", experiment},
                      {"version", kVersion},
                      {"config", to_json(cfg)},
                      {"seeds",
                       {{"root", cfg.seed},
                        {"paths", derive_seed(cfg.seed, "paths")},
                        {"reference", derive_seed(cfg.seed, "reference")},
                        {"tables", derive_seed(cfg.seed, "tables")}}}};
  std::ofstream out(file);
  if (!out) throw ParameterError("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

}  // namespace spotvol
