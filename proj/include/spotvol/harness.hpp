#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spotvol/activity.hpp"
#include "spotvol/inference.hpp"
#include "spotvol/pathsim.hpp"

namespace spotvol {

/// Where the ratio target sigma_{n,t} sits relative to the estimator's block.
/// block1_end: estimator on block 1, t = k delta_n (default).
/// block2_start: estimator on block 2, t = k delta_n.
enum class TargetConvention { block1_end, block2_start };

/// Interval families evaluated by the coverage experiment. large_k and
/// large_k_diff dispatch on (beta, p) to the Gaussian, boundary or stable interval.
enum class CoverageMethod { fixed_k, fixed_k_diff, large_k, large_k_diff };

std::string to_string(CoverageMethod m);
CoverageMethod coverage_method_from_string(const std::string& s);

struct ExperimentConfig {
  ModelConfig model;  // model.replicate is the index of the first replicate
  std::vector<double> p_list{0.6, 1.0};
  std::vector<int> k_list{5, 15, 30, 60};
  double alpha = 0.1;
  std::size_t replications = 10'000;
  std::vector<CoverageMethod> methods{CoverageMethod::fixed_k};
  std::uint64_t seed = 20240601;
  std::optional<double> gamma;  // when set, k = ceil(delta_n^-gamma) replaces k_list
  TargetConvention target = TargetConvention::block1_end;
  std::size_t reference_draws = 200'000;  // limit-law samples for KS and histograms
  std::size_t table_size = kDefaultTableSize;
  BoundMethod fixed_bounds = BoundMethod::hdi;
  BoundMethod stable_split = BoundMethod::equal_tail;
  Transform f = Transform::log();
  Execution execution = Execution::parallel;

  std::vector<int> effective_k_list() const;
  void validate() const;
};

struct HistogramComparison {
  std::vector<double> bin_edges;  // size bins + 1
  std::vector<double> finite_sample_density;
  std::vector<double> fixed_k_limit_density;
  std::vector<double> large_k_limit_density;
  double ks_fixed = 0.0;
  double ks_large = 0.0;
  double p = 0.0;
  int k = 0;
  double beta = 0.0;
  std::size_t replications = 0;
  CouplingKind large_k_law = CouplingKind::largek_gauss;
};

struct CoverageReport {
  std::string method;
  double p = 0.0;
  int k = 0;
  double nominal = 0.0;
  double empirical = 0.0;
  double mc_se = 0.0;
  double mean_width = 0.0;  // on the sigma_{n,t} scale
  std::size_t replications = 0;
};

/// Finite-sample ratio sigma-hat(p) / sigma_{n,t}^p against the fixed-k
/// coupling law and the large-k limit mapped to the ratio scale, c (1 + r_k xi).
std::vector<HistogramComparison> run_histogram_experiment(const ExperimentConfig& cfg);

/// Empirical coverage of sigma_{n,t} for every (method, p, k).
std::vector<CoverageReport> run_coverage_experiment(const ExperimentConfig& cfg);

/// Plug-in index experiment over full-horizon paths.
struct FeasibleConfig {
  ModelConfig model;
  int k = 15;
  double p = 1.0;
  double alpha = 0.1;
  std::size_t replications = 2'000;
  BetaMethod beta_method = BetaMethod::second_diff_pv;
  double beta_p = 0.5;
  double endpoint_tolerance = 0.05;
  std::size_t table_size = kDefaultTableSize;
  std::uint64_t table_seed = kDefaultTableSeed;
  Execution execution = Execution::parallel;
};

struct FeasibleReport {
  double coverage_known = 0.0;
  double coverage_feasible = 0.0;
  double mc_se = 0.0;
  double endpoint_agreement = 0.0;  // share of replications with max relative endpoint change < tolerance
  double median_beta_error = 0.0;
  std::size_t intervals = 0;
  std::vector<double> beta_hat;
};

FeasibleReport run_feasible_experiment(const FeasibleConfig& cfg);

/// beta-hat from the fine-mesh returns of full-horizon paths, per method.
struct BetaStudy {
  BetaMethod method;
  std::vector<double> estimates;
  double median_abs_error = 0.0;
};

struct BetaStudyConfig {
  ModelConfig model;
  std::size_t replications = 200;
  double pv_power = 0.5;
  double varpi = 0.2;
  double eta_mult = 8.0;
  double eta_prime_mult = 32.0;
  Execution execution = Execution::parallel;
};

std::vector<BetaStudy> run_beta_experiment(const BetaStudyConfig& cfg);

/// Centred, normalised block sums of driver increments, the coupling
/// variables of the large-k theory, for the regime of (beta, p).
struct LimitSample {
  CouplingKind first_kind;
  CouplingKind diff_kind;
  std::vector<double> first;  // sorted
  std::vector<double> diff;   // sorted
};

LimitSample run_limit_experiment(double beta, double p, int k, std::size_t replications,
                                 std::uint64_t seed, Execution exec = Execution::parallel);

/// Shared Freedman-Diaconis bins over the central 99% of the pooled sample.
std::vector<double> freedman_diaconis_edges(std::vector<double> pooled);

void write_histogram_csv(const std::filesystem::path& file, const HistogramComparison& h);
void write_ks_table(const std::filesystem::path& file, const std::vector<HistogramComparison>& hs);
void write_coverage_csv(const std::filesystem::path& file, const std::vector<CoverageReport>& rs);
/// histograms_<p>_<k>.csv for each comparison plus ks_table.csv.
void write_histogram_outputs(const std::filesystem::path& dir, const std::vector<HistogramComparison>& hs);
void write_manifest(const std::filesystem::path& file, const ExperimentConfig& cfg,
                    const std::string& experiment);

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

}  // namespace spotvol
