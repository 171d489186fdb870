#include "spotvol/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spotvol/activity.hpp"
#include "spotvol/error.hpp"
#include "spotvol/estimators.hpp"
#include "spotvol/harness.hpp"
#include "spotvol/inference.hpp"
#include "spotvol/io.hpp"
#include "spotvol/pathsim.hpp"

namespace spotvol::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelFlags {
  std::optional<double> beta;
  std::optional<double> horizon;
  std::optional<double> obs_dt;
  std::optional<double> fine_dt;
  std::optional<double> drift;
  std::optional<double> vol;
};

void add_model_flags(CLI::App* app, ModelFlags& m) {
  app->add_option("--beta", m.beta, "Jump activity index of the driver");
  app->add_option("--horizon", m.horizon, "Horizon in trading days");
  app->add_option("--obs-dt", m.obs_dt, "Observation interval");
  app->add_option("--fine-dt", m.fine_dt, "Simulation step");
  app->add_option("--drift", m.drift, "Constant drift (default none)");
  app->add_option("--vol", m.vol, "Constant volatility instead of the two-factor CIR model");
}

void apply_model_flags(const ModelFlags& f, ModelConfig& m) {
  if (f.beta) m.beta = *f.beta;
  if (f.horizon) m.horizon = *f.horizon;
  if (f.obs_dt) m.obs_dt = *f.obs_dt;
  if (f.fine_dt) m.fine_dt = *f.fine_dt;
  if (f.drift) m.drift = DriftSpec::constant(*f.drift);
  if (f.vol) m.vol = VolSpec::constant(*f.vol);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("invalid JSON in " + path + ": " + e.what());
  }
}

SeriesKind series_kind(const std::string& s) {
  if (s == "auto") return SeriesKind::automatic;
  if (s == "price") return SeriesKind::price;
  if (s == "increment") return SeriesKind::increment;
  throw UsageError("unknown input kind '" + s + "'");
}

BoundMethod bound_method(const std::string& s) {
  try {
    return bound_method_from_string(s);
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
}

Transform transform(const std::string& name, double r) {
  if (name == "log") return Transform::log();
  if (name == "power") return Transform::power(r);
  throw UsageError("unknown transform '" + name + "'");
}

enum class EstMethod { fixed_k, fixed_k_diff, large_k, large_k_diff };

EstMethod est_method(const std::string& s) {
  if (s == "fixed-k") return EstMethod::fixed_k;
  if (s == "fixed-k-diff") return EstMethod::fixed_k_diff;
  if (s == "large-k") return EstMethod::large_k;
  if (s == "large-k-diff") return EstMethod::large_k_diff;
  throw UsageError("unknown estimator method '" + s + "'");
}

SpotEstimate estimate_block(EstMethod m, const ReturnSeries& r, BlockSpec b, double p,
                            std::optional<double> beta) {
  switch (m) {
    case EstMethod::fixed_k: return estimate_fixed_k(r, b, p);
    case EstMethod::fixed_k_diff: return estimate_fixed_k_diff(r, b, p);
    case EstMethod::large_k:
    case EstMethod::large_k_diff:
      if (!beta) throw UsageError("large-k estimators need --beta");
      return m == EstMethod::large_k ? estimate_large_k(r, b, p, *beta) : estimate_large_k_diff(r, b, p, *beta);
  }
  throw UsageError("unknown estimator method");
}

BetaEstimate estimate_beta(BetaMethod m, const ReturnSeries& r, double p, double varpi, double eta_mult,
                           double eta_prime_mult) {
  switch (m) {
    case BetaMethod::threshold_count: return beta_threshold_count_scaled(r, varpi, eta_mult, eta_prime_mult);
    case BetaMethod::two_scale_pv: return beta_two_scale_pv(r, p);
    case BetaMethod::second_diff_pv: return beta_second_diff_pv(r, p);
  }
  throw UsageError("unknown beta method");
}

BetaMethod beta_method(const std::string& s) {
  try {
    return beta_method_from_string(s);
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
}

/// Writes to --output when given, otherwise to the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw UsageError("cannot write " + path);
      out_ = &file_;
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

void check_input(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError("input file not found: " + path);
}

struct Common {
  std::uint64_t seed = 20240601;
  int threads = 0;
  std::string cache_dir;
};

std::optional<std::filesystem::path> cache_dir(const Common& c) {
  if (!c.cache_dir.empty()) return std::filesystem::path(c.cache_dir);
  if (const char* env = std::getenv("SPOTVOL_CACHE_DIR"); env && *env) return std::filesystem::path(env);
  return std::nullopt;
}

struct ExperimentFlags {
  std::string config;
  std::string output;
  ModelFlags model;
  std::vector<double> p_list;
  std::vector<int> k_list;
  std::optional<double> alpha;
  std::optional<std::size_t> reps;
  bool full = false;
  std::vector<std::string> methods;
  std::optional<double> gamma;
  std::string target;
  std::optional<std::size_t> reference_draws;
  std::optional<std::size_t> table_size;
  std::string bounds;
  std::string stable_split;
  std::string transform;
  double r = 1.0;
};

void add_experiment_flags(CLI::App* app, ExperimentFlags& f) {
  app->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  app->add_option("--output", f.output, "Output directory")->required();
  add_model_flags(app, f.model);
  app->add_option("--p", f.p_list, "Power list");
  app->add_option("--k", f.k_list, "Block size list");
  app->add_option("--alpha", f.alpha, "One minus the nominal level");
  app->add_option("--reps", f.reps, "Monte Carlo replications");
  app->add_flag("--full", f.full, "Preset of 100000 replications");
  app->add_option("--methods", f.methods, "fixed-k, fixed-k-diff, large-k, large-k-diff");
  app->add_option("--gamma", f.gamma, "Use k = ceil(obs_dt^-gamma)");
  app->add_option("--target", f.target, "block1_end or block2_start");
  app->add_option("--reference-draws", f.reference_draws, "Limit-law draws for KS and histograms");
  app->add_option("--table-size", f.table_size, "Quantile table size");
  app->add_option("--bounds", f.bounds, "Fixed-k bounds: hdi or equal-tail");
  app->add_option("--stable-split", f.stable_split, "Stable tail split: equal-tail or hdi");
  app->add_option("--transform", f.transform, "log or power");
  app->add_option("--r", f.r, "Exponent of the power transform");
}

ExperimentConfig build_experiment(const ExperimentFlags& f, const Common& c, bool seed_given) {
  ExperimentConfig cfg;
  if (!f.config.empty()) {
    try {
      cfg = experiment_config_from_json(read_json_file(f.config));
    } catch (const json::exception& e) {
      throw UsageError(std::string("bad experiment config: ") + e.what());
    }
  }
  if (seed_given || f.config.empty()) cfg.seed = c.seed;
  apply_model_flags(f.model, cfg.model);
  if (!f.p_list.empty()) cfg.p_list = f.p_list;
  if (!f.k_list.empty()) cfg.k_list = f.k_list;
  if (f.alpha) cfg.alpha = *f.alpha;
  if (f.full) cfg.replications = 100'000;
  if (f.reps) cfg.replications = *f.reps;
  if (!f.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : f.methods) {
      try {
        cfg.methods.push_back(coverage_method_from_string(m));
      } catch (const ParameterError& e) {
        throw UsageError(e.what());
      }
    }
  }
  if (f.gamma) cfg.gamma = *f.gamma;
  if (!f.target.empty()) {
    if (f.target == "block1_end") cfg.target = TargetConvention::block1_end;
    else if (f.target == "block2_start") cfg.target = TargetConvention::block2_start;
    else throw UsageError("unknown target '" + f.target + "'");
  }
  if (f.reference_draws) cfg.reference_draws = *f.reference_draws;
  if (f.table_size) cfg.table_size = *f.table_size;
  if (!f.bounds.empty()) cfg.fixed_bounds = bound_method(f.bounds);
  if (!f.stable_split.empty()) cfg.stable_split = bound_method(f.stable_split);
  if (!f.transform.empty()) cfg.f = transform(f.transform, f.r);
  return cfg;
}

int emit_error(std::ostream& err, int code, const std::string& message) {
  err << json{{"code", code}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spot volatility inference for pure-jump stable-driven models", "spotvol"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Common common;
  auto* seed_opt = app.add_option("--seed", common.seed, "Root seed for all randomness");
  app.add_option("--threads", common.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--cache-dir", common.cache_dir, "Quantile table cache directory (env SPOTVOL_CACHE_DIR)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate one path and write returns, price, sigma and sidecar");
  std::string sim_config;
  std::string sim_output;
  std::size_t sim_replicate = 0;
  ModelFlags sim_model;
  sim->add_option("--config", sim_config, "JSON model config")->check(CLI::ExistingFile);
  sim->add_option("--output", sim_output, "Output prefix")->required();
  sim->add_option("--replicate", sim_replicate, "Replicate index");
  add_model_flags(sim, sim_model);

  // estimate
  auto* est = app.add_subcommand("estimate", "Spot volatility estimates per block");
  std::string input;
  std::string input_kind = "auto";
  double delta_n = 1.0 / 390.0;
  std::string est_method_name = "fixed-k";
  int k = 15;
  double p = 1.0;
  std::optional<double> beta;
  std::string output;
  for (auto* sub : {est}) {
    sub->add_option("--input", input, "Returns or price CSV")->required();
    sub->add_option("--input-kind", input_kind, "auto, price or increment");
    sub->add_option("--delta-n", delta_n, "Sampling interval when the CSV has no time column");
    sub->add_option("--method", est_method_name, "fixed-k, fixed-k-diff, large-k or large-k-diff");
    sub->add_option("--k", k, "Block size")->check(CLI::PositiveNumber);
    sub->add_option("--p", p, "Power");
    sub->add_option("--beta", beta, "Activity index, needed by large-k estimators");
    sub->add_option("--output", output, "Output CSV (default stdout)");
  }

  // beta
  auto* bet = app.add_subcommand("beta", "Estimate the jump activity index");
  std::string beta_method_name = "second-diff-pv";
  double beta_p = 0.5;
  double varpi = 0.2;
  double eta_mult = 8.0;
  double eta_prime_mult = 32.0;
  bet->add_option("--input", input, "Returns or price CSV")->required();
  bet->add_option("--input-kind", input_kind, "auto, price or increment");
  bet->add_option("--delta-n", delta_n, "Sampling interval when the CSV has no time column");
  bet->add_option("--method", beta_method_name, "threshold-count, two-scale-pv or second-diff-pv");
  bet->add_option("--p", beta_p, "Power of the variation estimators");
  bet->add_option("--varpi", varpi, "Threshold exponent");
  bet->add_option("--eta-mult", eta_mult, "Lower threshold in median absolute returns");
  bet->add_option("--eta-prime-mult", eta_prime_mult, "Upper threshold in median absolute returns");
  bet->add_option("--output", output, "Output JSON (default stdout)");

  // ci
  auto* ci = app.add_subcommand("ci", "Per-block confidence intervals");
  double alpha = 0.1;
  std::string bounds = "hdi";
  std::string stable_split = "equal-tail";
  std::string transform_name = "log";
  double transform_r = 1.0;
  std::size_t table_size = kDefaultTableSize;
  std::string beta_input;
  ci->add_option("--input", input, "Returns or price CSV")->required();
  ci->add_option("--input-kind", input_kind, "auto, price or increment");
  ci->add_option("--delta-n", delta_n, "Sampling interval when the CSV has no time column");
  ci->add_option("--method", est_method_name, "fixed-k, fixed-k-diff, large-k or large-k-diff");
  ci->add_option("--k", k, "Block size")->check(CLI::PositiveNumber);
  ci->add_option("--p", p, "Power");
  ci->add_option("--beta", beta, "Known activity index");
  ci->add_option("--beta-input", beta_input, "Fine returns for a feasible interval with estimated beta");
  ci->add_option("--beta-method", beta_method_name, "Estimator used with --beta-input");
  ci->add_option("--beta-p", beta_p, "Power used with --beta-input");
  ci->add_option("--alpha", alpha, "One minus the nominal level");
  ci->add_option("--bounds", bounds, "Fixed-k bounds: hdi or equal-tail");
  ci->add_option("--stable-split", stable_split, "Stable tail split: equal-tail or hdi");
  ci->add_option("--transform", transform_name, "log or power");
  ci->add_option("--r", transform_r, "Exponent of the power transform");
  ci->add_option("--table-size", table_size, "Quantile table size");
  ci->add_option("--output", output, "Output CSV (default stdout)");

  // histogram, coverage
  ExperimentFlags hist_flags;
  auto* hist = app.add_subcommand("histogram", "Finite-sample vs limit distributions with KS distances");
  add_experiment_flags(hist, hist_flags);
  ExperimentFlags cov_flags;
  auto* cov = app.add_subcommand("coverage", "Empirical coverage of the interval methods");
  add_experiment_flags(cov, cov_flags);

  // quantile-cache
  auto* qc = app.add_subcommand("quantile-cache", "Build or load a quantile table in the cache directory");
  std::string kind_name = "fixed_k_first";
  double qc_beta = 1.6;
  double qc_p = 1.0;
  int qc_k = 15;
  qc->add_option("--kind", kind_name, "Coupling law kind");
  qc->add_option("--beta", qc_beta, "Activity index");
  qc->add_option("--p", qc_p, "Power");
  qc->add_option("--k", qc_k, "Block size for fixed-k kinds");
  qc->add_option("--size", table_size, "Monte Carlo size");
  qc->add_option("--alpha", alpha, "One minus the nominal level of the reported bounds");
  qc->add_option("--bounds", bounds, "hdi or equal-tail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    emit_error(err, kExitUsage, e.what());
    err << app.help();
    return kExitUsage;
  }

  try {
    if (common.threads > 0) set_worker_threads(common.threads);
    const auto tables_seed = derive_seed(common.seed, "tables");
    const bool seed_given = seed_opt->count() > 0;

    if (*sim) {
      ModelConfig cfg;
      if (!sim_config.empty()) {
        try {
          cfg = read_json_file(sim_config).get<ModelConfig>();
        } catch (const json::exception& e) {
          throw UsageError(std::string("bad model config: ") + e.what());
        }
      }
      if (seed_given || sim_config.empty()) cfg.seed = common.seed;
      if (sim->count("--replicate")) cfg.replicate = sim_replicate;
      apply_model_flags(sim_model, cfg);
      cfg.validate();
      export_path(sim_output, simulate_path(cfg), cfg);
      return kExitOk;
    }

    if (*est || *ci || *bet) check_input(input);
    const auto read_input = [&] { return read_series_csv(input, series_kind(input_kind), delta_n); };

    if (*est) {
      const auto method = est_method(est_method_name);
      const ReturnSeries r = read_input();
      std::ostringstream rows;
      rows << "block,start_time,end_time,estimate\n";
      const int blocks = block_count(r, k);
      for (int j = 1; j <= blocks; ++j) {
        const auto e = estimate_block(method, r, BlockSpec{k, j}, p, beta);
        rows << j << ',' << format_double(e.block.start_time(r.delta_n)) << ',' << format_double(e.block.end_time(r.delta_n)) << ','
              << format_double(e.value) << '\n';
      }
      Sink sink(output, out);
      *sink << rows.str();
      return kExitOk;
    }

    if (*bet) {
      const auto method = beta_method(beta_method_name);
      const ReturnSeries r = read_input();
      const auto b = estimate_beta(method, r, beta_p, varpi, eta_mult, eta_prime_mult);
      json j = {{"beta_hat", b.value},
                {"raw_value", b.raw_value},
                {"method", to_string(b.method)},
                {"clamped", b.clamped},
                {"degenerate", b.degenerate},
                {"diagnostics", b.diagnostics}};
      Sink sink(output, out);
      *sink << j.dump(2) << '\n';
      return kExitOk;
    }

    if (*ci) {
      const auto method = est_method(est_method_name);
      const auto fixed_bounds = bound_method(bounds);
      const auto split = bound_method(stable_split);
      const Transform f = transform(transform_name, transform_r);
      std::optional<BetaEstimate> beta_hat;
      if (!beta_input.empty()) {
        check_input(beta_input);
        const auto fine = read_series_csv(beta_input, series_kind(input_kind), delta_n);
        beta_hat = estimate_beta(beta_method(beta_method_name), fine, beta_p, varpi, eta_mult, eta_prime_mult);
        if (!beta) beta = snap_beta(beta_hat->value);
      }
      if (!beta) throw UsageError("ci needs --beta or --beta-input");
      const ReturnSeries r = read_input();
      QuantileTableCache cache(table_size, tables_seed, cache_dir(common));
      std::ostringstream rows;
      rows << "block,start_time,end_time,estimate,lo,hi,sigma_lo,sigma_hi,level,method,beta\n";
      const int blocks = block_count(r, k);
      for (int j = 1; j <= blocks; ++j) {
        const auto e = estimate_block(method, r, BlockSpec{k, j}, p, beta);
        ConfidenceInterval interval;
        if (method == EstMethod::fixed_k || method == EstMethod::fixed_k_diff) {
          interval = beta_hat && !ci->count("--beta") ? ci_fixed_k_feasible(e, *beta_hat, alpha, cache, fixed_bounds)
                                                      : ci_fixed_k(e, *beta, alpha, cache, fixed_bounds);
        } else {
          const auto regime = large_k_regime(*beta, p, method == EstMethod::large_k_diff);
          if (regime == CouplingKind::largek_gauss || regime == CouplingKind::largek_gauss_diff) {
            interval = ci_large_k_gauss(e, f, alpha);
          } else if (regime == CouplingKind::largek_stable || regime == CouplingKind::largek_stable_diff) {
            interval = ci_large_k_stable(e, f, alpha, cache, split);
          } else {
            interval = ci_boundary_gauss(e, f, alpha);
          }
        }
        rows << j << ',' << format_double(e.block.start_time(r.delta_n)) << ',' << format_double(e.block.end_time(r.delta_n)) << ','
              << format_double(e.value) << ',' << format_double(interval.lo) << ','
              << format_double(interval.hi) << ',' << format_double(interval.sigma_lo) << ','
              << format_double(interval.sigma_hi) << ',' << format_double(interval.level) << ','
              << to_string(interval.method) << ',' << format_double(*beta) << '\n';
      }
      Sink sink(output, out);
      *sink << rows.str();
      return kExitOk;
    }

    if (*hist || *cov) {
      const bool is_hist = static_cast<bool>(*hist);
      const auto& flags = is_hist ? hist_flags : cov_flags;
      const ExperimentConfig cfg = build_experiment(flags, common, seed_given);
      cfg.validate();
      const std::filesystem::path dir = flags.output;
      std::filesystem::create_directories(dir);
      if (is_hist) {
        write_histogram_outputs(dir, run_histogram_experiment(cfg));
      } else {
        write_coverage_csv(dir / "coverage.csv", run_coverage_experiment(cfg));
      }
      write_manifest(dir / "run_manifest.json", cfg, is_hist ? "histogram" : "coverage");
      return kExitOk;
    }

    if (*qc) {
      const auto dir = cache_dir(common);
      if (!dir) throw UsageError("quantile-cache needs --cache-dir or SPOTVOL_CACHE_DIR");
      CouplingKind kind;
      try {
        kind = coupling_kind_from_string(kind_name);
      } catch (const ParameterError& e) {
        throw UsageError(e.what());
      }
      const CouplingLaw law{kind, qc_beta, qc_p, is_fixed_k(kind) ? qc_k : 0};
      QuantileTableCache cache(table_size, tables_seed, dir);
      const auto table = cache.get(law);
      const auto method = bound_method(bounds);
      const auto [lo, hi] = is_fixed_k(kind) ? fixed_k_bounds(*table, alpha, method)
                                             : limit_quantiles(*table, alpha, method);
      json j = {{"file", (*dir / cache.file_name(law)).string()},
                {"kind", to_string(kind)},
                {"beta", law.beta},
                {"p", law.p},
                {"k", law.k},
                {"mc_size", table->mc_size()},
                {"seed", table->seed()},
                {"alpha", alpha},
                {"lo", lo},
                {"hi", hi}};
      out << j.dump(2) << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    emit_error(err, kExitUsage, e.what());
    return kExitUsage;
  } catch (const ParameterError& e) {
    return emit_error(err, kExitUsage, e.what());
  } catch (const std::domain_error& e) {
    return emit_error(err, kExitDomain, e.what());
  } catch (const EstimationError& e) {
    return emit_error(err, kExitDomain, e.what());
  } catch (const std::exception& e) {
    return emit_error(err, kExitDomain, e.what());
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace spotvol::cli
