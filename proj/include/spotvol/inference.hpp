#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spotvol/activity.hpp"
#include "spotvol/estimators.hpp"
#include "spotvol/parallel.hpp"
#include "spotvol/rng.hpp"

namespace spotvol {

/// Reference laws for the estimation error.
///  fixed_k_first        k^-1 sum_{i<=k} |Z_i|^p,        Z ~ S(beta, 0, 2^(-1/beta), 0)
///  fixed_k_diff         (2/k) sum_{i<=k/2} |Z~_i|^p,    Z~ ~ S(beta, 0, 1, 0)
///  largek_gauss(_diff)  N(0, c(2p)/c(p)^2 - 1)          (c~ for _diff), p < beta/2
///  largek_stable(_diff) S(beta/p, 1, 1/C, 0)            (C~ for _diff), beta/2 < p < beta
///  boundary_gauss(_diff) N(0, boundary_variance)        p = beta/2
enum class CouplingKind {
  fixed_k_first,
  fixed_k_diff,
  largek_gauss,
  largek_gauss_diff,
  largek_stable,
  largek_stable_diff,
  boundary_gauss,
  boundary_gauss_diff
};

std::string to_string(CouplingKind kind);
CouplingKind coupling_kind_from_string(const std::string& s);
bool is_fixed_k(CouplingKind kind);
bool is_differenced(CouplingKind kind);

struct CouplingLaw {
  CouplingKind kind = CouplingKind::fixed_k_first;
  double beta = 1.6;
  double p = 1.0;
  int k = 0;  // fixed-k kinds only

  void validate() const;
};

enum class BoundMethod { hdi, equal_tail };
std::string to_string(BoundMethod m);
BoundMethod bound_method_from_string(const std::string& s);

/// |p - beta/2| below this is treated as the boundary case.
inline constexpr double kBoundaryBand = 1e-9;

/// Large-k regime for (beta, p): Gaussian, boundary or stable.
CouplingKind large_k_regime(double beta, double p, bool differenced);

/// Sorted Monte Carlo sample of a coupling law. Immutable once built and safe
/// to share across threads; bound lookups are memoised per (alpha, method).
class QuantileTable {
 public:
  QuantileTable(CouplingLaw law, std::uint64_t seed, std::vector<double> sorted_sample);

  const CouplingLaw& law() const { return law_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t mc_size() const { return sample_->size(); }
  std::span<const double> sorted_sample() const { return *sample_; }

  /// Cached bound pair for (alpha, method), computing it with `compute` on a miss.
  template <class Compute>
  std::pair<double, double> cached(double alpha, BoundMethod method, Compute&& compute) const {
    const auto key = std::make_pair(alpha, method);
    std::lock_guard lock(memo_->mutex);
    if (auto it = memo_->bounds.find(key); it != memo_->bounds.end()) return it->second;
    const auto value = compute();
    memo_->bounds.emplace(key, value);
    return value;
  }

 private:
  struct Memo {
    std::mutex mutex;
    std::map<std::pair<double, BoundMethod>, std::pair<double, double>> bounds;
  };
  CouplingLaw law_;
  std::uint64_t seed_;
  std::shared_ptr<const std::vector<double>> sample_;
  std::shared_ptr<Memo> memo_;
};

inline constexpr std::uint64_t kDefaultTableSeed = 0x5EED5EEDull;
inline constexpr std::size_t kDefaultTableSize = 1'000'000;

/// One realisation of the coupling variable from its own stream.
double coupling_draw(const CouplingLaw& law, Stream& rng);

/// N i.i.d. realisations, sorted. Realisation i uses substream i of a seed
/// derived from (seed, kind) only, so tables at different beta share common
/// random numbers.
QuantileTable coupling_sample(const CouplingLaw& law, std::size_t n, std::uint64_t seed,
                              Execution exec = Execution::parallel);

/// Bounds (L, U) for the reciprocal 1/S of a fixed-k coupling variable with
/// P[L <= 1/S <= U] = 1 - alpha. hdi: shortest window of ceil((1-alpha)N)
/// consecutive order statistics; equal_tail: alpha/2 quantiles each side.
std::pair<double, double> fixed_k_bounds(const QuantileTable& table, double alpha, BoundMethod method);

/// (q_L, q_U) of a large-k limit law sample with coverage 1 - alpha.
std::pair<double, double> limit_quantiles(const QuantileTable& table, double alpha, BoundMethod method);

/// Order-statistic index (0-based) of the type-1 empirical quantile at prob.
std::size_t quantile_index(std::size_t n, double prob);
/// Number of consecutive order statistics an HDI window spans, ceil((1-alpha) n).
std::size_t hdi_window_size(std::size_t n, double alpha);

/// Rounds beta to the cache grid (0.005).
double snap_beta(double beta);
inline constexpr double kBetaGridInverse = 200.0;

/// Shared, optionally disk-backed store of quantile tables.
class QuantileTableCache {
 public:
  explicit QuantileTableCache(std::size_t mc_size = kDefaultTableSize,
                              std::uint64_t seed = kDefaultTableSeed,
                              std::optional<std::filesystem::path> dir = std::nullopt,
                              Execution exec = Execution::parallel);

  std::shared_ptr<const QuantileTable> get(const CouplingLaw& law);
  /// Registers a prebuilt table; later get() calls for its law return it.
  void put(std::shared_ptr<const QuantileTable> table);

  std::size_t mc_size() const { return mc_size_; }
  std::uint64_t seed() const { return seed_; }

  /// File name under the cache directory for a law.
  std::string file_name(const CouplingLaw& law) const;

 private:
  std::size_t mc_size_;
  std::uint64_t seed_;
  std::optional<std::filesystem::path> dir_;
  Execution exec_;
  struct Slot {
    std::once_flag once;
    std::shared_ptr<const QuantileTable> table;
  };
  std::shared_ptr<const QuantileTable> build(const CouplingLaw& law) const;

  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Slot>> tables_;
};

void save_table(const std::filesystem::path& file, const QuantileTable& table);
std::optional<QuantileTable> load_table(const std::filesystem::path& file);

/// Smooth transformation f of sigma^p for the large-k intervals.
struct Transform {
  enum class Kind { log, power };
  Kind kind = Kind::log;
  double r = 1.0;

  static Transform log() { return {}; }
  static Transform power(double r);

  double apply(double x) const;
  /// f'(x) x
  double slope_times_x(double x) const;
  double inverse(double y) const;
};

enum class CiTarget { sigma_nt, f_of_sigma_p };

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.9;
  CiTarget target = CiTarget::sigma_nt;
  Transform f;
  CouplingKind method = CouplingKind::fixed_k_first;
  BlockSpec block;
  double sigma_lo = 0.0;  // back-transformed to the sigma_{n,t} scale
  double sigma_hi = 0.0;
  bool degenerate = false;

  bool covers_sigma(double sigma_nt) const { return sigma_lo <= sigma_nt && sigma_nt <= sigma_hi; }
};

/// [(L v)^(1/p), (U v)^(1/p)] with v the raw fixed-k estimate.
ConfidenceInterval ci_fixed_k(const SpotEstimate& est, double beta, double alpha,
                              QuantileTableCache& cache, BoundMethod method = BoundMethod::hdi);

/// ci_fixed_k at the estimated index, snapped to the cache grid.
ConfidenceInterval ci_fixed_k_feasible(const SpotEstimate& est, const BetaEstimate& beta_hat,
                                       double alpha, QuantileTableCache& cache,
                                       BoundMethod method = BoundMethod::hdi);

/// Gaussian large-k interval for f(sigma^p), p < beta/2.
ConfidenceInterval ci_large_k_gauss(const SpotEstimate& est, Transform f, double alpha);

/// Skewed-stable large-k interval for f(sigma^p), beta/2 < p < beta.
ConfidenceInterval ci_large_k_stable(const SpotEstimate& est, Transform f, double alpha,
                                     QuantileTableCache& cache,
                                     BoundMethod tail_split = BoundMethod::equal_tail);

/// Gaussian interval at rate sqrt(k log k) for p = beta/2.
ConfidenceInterval ci_boundary_gauss(const SpotEstimate& est, Transform f, double alpha);

}  // namespace spotvol
