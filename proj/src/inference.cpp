#include "spotvol/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <omp.h>

#include "spotvol/error.hpp"
#include "spotvol/io.hpp"
#include "spotvol/special.hpp"
#include "spotvol/stable.hpp"

namespace spotvol {

void set_worker_threads(int threads) {
  omp_set_num_threads(threads > 0 ? threads : omp_get_num_procs());
}

namespace {

constexpr double kIndexSlack = 1e-9;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
}

// Precomputed per-law quantities so a draw does no special-function work.
struct DrawPlan {
  CouplingKind kind;
  double p = 1.0;
  int terms = 0;
  double weight = 1.0;
  double sd = 1.0;
  StableLaw law{2.0, 0.0, 1.0, 0.0};
};

DrawPlan make_plan(const CouplingLaw& c) {
  c.validate();
  DrawPlan plan{c.kind};
  plan.p = c.p;
  switch (c.kind) {
    case CouplingKind::fixed_k_first:
      plan.terms = c.k;
      plan.weight = 1.0 / c.k;
      plan.law = StableLaw::driver(c.beta);
      break;
    case CouplingKind::fixed_k_diff:
      plan.terms = c.k / 2;
      plan.weight = 2.0 / c.k;
      plan.law = StableLaw::differenced_driver(c.beta);
      break;
    case CouplingKind::largek_gauss: {
      const double cp = moment_constant_c(c.beta, c.p);
      plan.sd = std::sqrt(moment_constant_c(c.beta, 2.0 * c.p) / (cp * cp) - 1.0);
      break;
    }
    case CouplingKind::largek_gauss_diff: {
      const double cp = moment_constant_c_tilde(c.beta, c.p);
      plan.sd = std::sqrt(moment_constant_c_tilde(c.beta, 2.0 * c.p) / (cp * cp) - 1.0);
      break;
    }
    case CouplingKind::largek_stable:
      plan.law = StableLaw(c.beta / c.p, 1.0, 1.0 / limit_scale_C(c.beta, c.p), 0.0);
      break;
    case CouplingKind::largek_stable_diff:
      plan.law = StableLaw(c.beta / c.p, 1.0, 1.0 / limit_scale_C_tilde(c.beta, c.p), 0.0);
      break;
    case CouplingKind::boundary_gauss:
      plan.sd = std::sqrt(boundary_variance(c.beta, false));
      break;
    case CouplingKind::boundary_gauss_diff:
      plan.sd = std::sqrt(boundary_variance(c.beta, true));
      break;
  }
  return plan;
}

double draw_with_plan(const DrawPlan& plan, Stream& rng) {
  switch (plan.kind) {
    case CouplingKind::fixed_k_first:
    case CouplingKind::fixed_k_diff: {
      double sum = 0.0;
      for (int i = 0; i < plan.terms; ++i) sum += std::pow(std::abs(stable_draw(plan.law, rng)), plan.p);
      return plan.weight * sum;
    }
    case CouplingKind::largek_stable:
    case CouplingKind::largek_stable_diff:
      return stable_draw(plan.law, rng);
    case CouplingKind::largek_gauss:
    case CouplingKind::largek_gauss_diff:
    case CouplingKind::boundary_gauss:
    case CouplingKind::boundary_gauss_diff:
      return plan.sd * rng.normal();
  }
  return 0.0;
}

std::pair<double, double> window_bounds(std::span<const double> sorted, double alpha,
                                        BoundMethod method) {
  const std::size_t n = sorted.size();
  if (method == BoundMethod::equal_tail) {
    return {sorted[quantile_index(n, 0.5 * alpha)], sorted[quantile_index(n, 1.0 - 0.5 * alpha)]};
  }
  const std::size_t m = hdi_window_size(n, alpha);
  std::size_t best = 0;
  double best_width = sorted[m - 1] - sorted[0];
  for (std::size_t i = 1; i + m <= n; ++i) {
    const double width = sorted[i + m - 1] - sorted[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {sorted[best], sorted[best + m - 1]};
}

std::string law_key(const CouplingLaw& law) {
  std::ostringstream ss;
  ss << to_string(law.kind) << "_b" << format_double(law.beta) << "_p" << format_double(law.p) << "_k"
     << law.k;
  return ss.str();
}

constexpr char kTableMagic[8] = {'S', 'V', 'Q', 'T', 'B', 'L', '0', '1'};

int rate_terms(const SpotEstimate& est) {
  return est.kind == EstimatorKind::second_order ? est.block.k / 2 : est.block.k;
}

void require_normalized(const SpotEstimate& est, const char* who) {
  if (!est.normalized || !est.beta_used) {
    throw ParameterError(std::string(who) + ": needs a normalized large-k estimate with beta set");
  }
}

ConfidenceInterval f_scale_interval(const SpotEstimate& est, Transform f, double alpha,
                                    CouplingKind method, double lower_offset, double upper_offset) {
  // f(sigma^p) in [f(v) - lower_offset * f'(v) v, f(v) - upper_offset * f'(v) v]
  ConfidenceInterval ci;
  ci.level = 1.0 - alpha;
  ci.target = CiTarget::f_of_sigma_p;
  ci.f = f;
  ci.method = method;
  ci.block = est.block;
  const double v = est.value;
  if (!(v > 0.0)) {
    ci.degenerate = true;
    ci.lo = ci.hi = f.apply(0.0);
    ci.sigma_lo = ci.sigma_hi = 0.0;
    return ci;
  }
  const double center = f.apply(v);
  const double slope = f.slope_times_x(v);
  ci.lo = center - lower_offset * slope;
  ci.hi = center - upper_offset * slope;
  ci.sigma_lo = std::pow(f.inverse(ci.lo), 1.0 / est.p);
  ci.sigma_hi = std::pow(f.inverse(ci.hi), 1.0 / est.p);
  return ci;
}

}  // namespace

std::string to_string(CouplingKind kind) {
  switch (kind) {
    case CouplingKind::fixed_k_first: return "fixed_k_first";
    case CouplingKind::fixed_k_diff: return "fixed_k_diff";
    case CouplingKind::largek_gauss: return "largek_gauss";
    case CouplingKind::largek_gauss_diff: return "largek_gauss_diff";
    case CouplingKind::largek_stable: return "largek_stable";
    case CouplingKind::largek_stable_diff: return "largek_stable_diff";
    case CouplingKind::boundary_gauss: return "boundary_gauss";
    case CouplingKind::boundary_gauss_diff: return "boundary_gauss_diff";
  }
  return "unknown";
}

CouplingKind coupling_kind_from_string(const std::string& s) {
  for (const auto kind :
       {CouplingKind::fixed_k_first, CouplingKind::fixed_k_diff, CouplingKind::largek_gauss,
        CouplingKind::largek_gauss_diff, CouplingKind::largek_stable, CouplingKind::largek_stable_diff,
        CouplingKind::boundary_gauss, CouplingKind::boundary_gauss_diff}) {
    if (to_string(kind) == s) return kind;
  }
  throw ParameterError("unknown coupling law '" + s + "'");
}

bool is_fixed_k(CouplingKind kind) {
  return kind == CouplingKind::fixed_k_first || kind == CouplingKind::fixed_k_diff;
}

bool is_differenced(CouplingKind kind) {
  return kind == CouplingKind::fixed_k_diff || kind == CouplingKind::largek_gauss_diff ||
         kind == CouplingKind::largek_stable_diff || kind == CouplingKind::boundary_gauss_diff;
}

std::string to_string(BoundMethod m) { return m == BoundMethod::hdi ? "hdi" : "equal-tail"; }

BoundMethod bound_method_from_string(const std::string& s) {
  if (s == "hdi") return BoundMethod::hdi;
  if (s == "equal-tail" || s == "equal_tail") return BoundMethod::equal_tail;
  throw ParameterError("unknown bound method '" + s + "'");
}

void CouplingLaw::validate() const {
  if (!(beta > 0.0 && beta <= 2.0)) throw ParameterError("CouplingLaw: beta must lie in (0, 2]");
  if (!(p > 0.0)) throw ParameterError("CouplingLaw: p must be positive");
  if (is_fixed_k(kind)) {
    if (k < 1) throw ParameterError("CouplingLaw: k must be at least 1");
    if (kind == CouplingKind::fixed_k_diff && k % 2 != 0) {
      throw ParameterError("CouplingLaw: k must be even for the differenced law");
    }
    return;
  }
  if (!(beta < 2.0)) throw ParameterError("CouplingLaw: large-k laws need beta < 2");
  if (large_k_regime(beta, p, is_differenced(kind)) != kind) {
    throw RegimeError("CouplingLaw: (beta, p) is outside the regime of " + to_string(kind));
  }
}

CouplingKind large_k_regime(double beta, double p, bool differenced) {
  if (!(p > 0.0 && p < beta)) throw DomainError("large-k inference needs 0 < p < beta");
  if (std::abs(p - 0.5 * beta) < kBoundaryBand) {
    return differenced ? CouplingKind::boundary_gauss_diff : CouplingKind::boundary_gauss;
  }
  if (p < 0.5 * beta) return differenced ? CouplingKind::largek_gauss_diff : CouplingKind::largek_gauss;
  return differenced ? CouplingKind::largek_stable_diff : CouplingKind::largek_stable;
}

QuantileTable::QuantileTable(CouplingLaw law, std::uint64_t seed, std::vector<double> sorted_sample)
    : law_(law),
      seed_(seed),
      sample_(std::make_shared<const std::vector<double>>(std::move(sorted_sample))),
      memo_(std::make_shared<Memo>()) {
  if (sample_->empty()) throw ParameterError("QuantileTable: empty sample");
  if (!std::is_sorted(sample_->begin(), sample_->end())) {
    throw ParameterError("QuantileTable: sample must be sorted");
  }
}

double coupling_draw(const CouplingLaw& law, Stream& rng) { return draw_with_plan(make_plan(law), rng); }

QuantileTable coupling_sample(const CouplingLaw& law, std::size_t n, std::uint64_t seed, Execution exec) {
  if (n == 0) throw ParameterError("coupling_sample: N must be positive");
  const DrawPlan plan = make_plan(law);
  const std::uint64_t stream_seed = derive_seed(seed, to_string(law.kind));
  std::vector<double> values(n);
  for_each_index(n, exec, [&](std::size_t i) {
    Stream rng(stream_seed, i);
    values[i] = draw_with_plan(plan, rng);
  });
  std::sort(values.begin(), values.end());
  return QuantileTable(law, seed, std::move(values));
}

std::size_t quantile_index(std::size_t n, double prob) {
  const double pos = std::ceil(prob * static_cast<double>(n) - kIndexSlack);
  return static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(n))) - 1;
}

std::size_t hdi_window_size(std::size_t n, double alpha) {
  const double m = std::ceil((1.0 - alpha) * static_cast<double>(n) - kIndexSlack);
  return static_cast<std::size_t>(std::clamp(m, 1.0, static_cast<double>(n)));
}

std::pair<double, double> fixed_k_bounds(const QuantileTable& table, double alpha, BoundMethod method) {
  check_alpha(alpha);
  if (!is_fixed_k(table.law().kind)) throw ParameterError("fixed_k_bounds: table is not a fixed-k law");
  return table.cached(alpha, method, [&] {
    const auto s = table.sorted_sample();
    std::vector<double> reciprocal(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) reciprocal[i] = 1.0 / s[s.size() - 1 - i];
    return window_bounds(reciprocal, alpha, method);
  });
}

std::pair<double, double> limit_quantiles(const QuantileTable& table, double alpha, BoundMethod method) {
  check_alpha(alpha);
  if (is_fixed_k(table.law().kind)) throw ParameterError("limit_quantiles: table is a fixed-k law");
  return table.cached(alpha, method, [&] { return window_bounds(table.sorted_sample(), alpha, method); });
}

double snap_beta(double beta) { return std::round(beta * kBetaGridInverse) / kBetaGridInverse; }

QuantileTableCache::QuantileTableCache(std::size_t mc_size, std::uint64_t seed,
                                       std::optional<std::filesystem::path> dir, Execution exec)
    : mc_size_(mc_size), seed_(seed), dir_(std::move(dir)), exec_(exec) {
  if (mc_size_ == 0) throw ParameterError("QuantileTableCache: mc_size must be positive");
}

std::string QuantileTableCache::file_name(const CouplingLaw& law) const {
  return law_key(law) + "_N" + std::to_string(mc_size_) + "_s" + std::to_string(seed_) + ".qtab";
}

std::shared_ptr<const QuantileTable> QuantileTableCache::get(const CouplingLaw& law) {
  law.validate();
  const std::string key = law_key(law);
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard lock(mutex_);
    auto& entry = tables_[key];
    if (!entry) entry = std::make_shared<Slot>();
    slot = entry;
  }
  // Different laws build concurrently; callers of the same law wait on one build.
  std::call_once(slot->once, [&] { slot->table = build(law); });
  return slot->table;
}

void QuantileTableCache::put(std::shared_ptr<const QuantileTable> table) {
  const std::string key = law_key(table->law());
  auto slot = std::make_shared<Slot>();
  std::call_once(slot->once, [&] { slot->table = std::move(table); });
  std::lock_guard lock(mutex_);
  tables_[key] = std::move(slot);
}

std::shared_ptr<const QuantileTable> QuantileTableCache::build(const CouplingLaw& law) const {
  if (!dir_) return std::make_shared<const QuantileTable>(coupling_sample(law, mc_size_, seed_, exec_));
  const auto file = *dir_ / file_name(law);
  if (auto loaded = load_table(file); loaded && loaded->mc_size() == mc_size_ && loaded->seed() == seed_) {
    return std::make_shared<const QuantileTable>(std::move(*loaded));
  }
  auto table = std::make_shared<const QuantileTable>(coupling_sample(law, mc_size_, seed_, exec_));
  std::filesystem::create_directories(*dir_);
  auto partial = file;
  partial += ".part" + std::to_string(reinterpret_cast<std::uintptr_t>(table.get()));
  save_table(partial, *table);
  std::filesystem::rename(partial, file);
  return table;
}

void save_table(const std::filesystem::path& file, const QuantileTable& table) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ParameterError("cannot write quantile table " + file.string());
  const auto& law = table.law();
  const auto kind = static_cast<std::uint32_t>(law.kind);
  const auto k = static_cast<std::int32_t>(law.k);
  const std::uint64_t seed = table.seed();
  const std::uint64_t n = table.mc_size();
  out.write(kTableMagic, sizeof(kTableMagic));
  out.write(reinterpret_cast<const char*>(&kind), sizeof(kind));
  out.write(reinterpret_cast<const char*>(&k), sizeof(k));
  out.write(reinterpret_cast<const char*>(&law.beta), sizeof(law.beta));
  out.write(reinterpret_cast<const char*>(&law.p), sizeof(law.p));
  out.write(reinterpret_cast<const char*>(&seed), sizeof(seed));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  const auto sample = table.sorted_sample();
  out.write(reinterpret_cast<const char*>(sample.data()),
            static_cast<std::streamsize>(sample.size() * sizeof(double)));
}

std::optional<QuantileTable> load_table(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[sizeof(kTableMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kTableMagic, sizeof(magic)) != 0) return std::nullopt;
  std::uint32_t kind;
  std::int32_t k;
  CouplingLaw law;
  std::uint64_t seed;
  std::uint64_t n;
  in.read(reinterpret_cast<char*>(&kind), sizeof(kind));
  in.read(reinterpret_cast<char*>(&k), sizeof(k));
  in.read(reinterpret_cast<char*>(&law.beta), sizeof(law.beta));
  in.read(reinterpret_cast<char*>(&law.p), sizeof(law.p));
  in.read(reinterpret_cast<char*>(&seed), sizeof(seed));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || kind > static_cast<std::uint32_t>(CouplingKind::boundary_gauss_diff) || n == 0) {
    return std::nullopt;
  }
  law.kind = static_cast<CouplingKind>(kind);
  law.k = k;
  std::vector<double> sample(n);
  in.read(reinterpret_cast<char*>(sample.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) return std::nullopt;
  return QuantileTable(law, seed, std::move(sample));
}

Transform Transform::power(double r) {
  if (!(r > 0.0)) throw ParameterError("power transform: r must be positive");
  return {Kind::power, r};
}

double Transform::apply(double x) const { return kind == Kind::log ? std::log(x) : std::pow(x, r); }

double Transform::slope_times_x(double x) const { return kind == Kind::log ? 1.0 : r * std::pow(x, r); }

double Transform::inverse(double y) const {
  if (kind == Kind::log) return std::exp(y);
  return y > 0.0 ? std::pow(y, 1.0 / r) : 0.0;
}

ConfidenceInterval ci_fixed_k(const SpotEstimate& est, double beta, double alpha,
                              QuantileTableCache& cache, BoundMethod method) {
  check_alpha(alpha);
  if (est.normalized) throw ParameterError("ci_fixed_k: expects the raw (unnormalized) estimate");
  const CouplingKind kind = est.kind == EstimatorKind::second_order ? CouplingKind::fixed_k_diff
                                                                    : CouplingKind::fixed_k_first;
  const auto table = cache.get(CouplingLaw{kind, beta, est.p, est.block.k});
  const auto [lower, upper] = fixed_k_bounds(*table, alpha, method);
  ConfidenceInterval ci;
  ci.level = 1.0 - alpha;
  ci.target = CiTarget::sigma_nt;
  ci.method = kind;
  ci.block = est.block;
  ci.degenerate = !(est.value > 0.0);
  ci.lo = std::pow(lower * est.value, 1.0 / est.p);
  ci.hi = std::pow(upper * est.value, 1.0 / est.p);
  ci.sigma_lo = ci.lo;
  ci.sigma_hi = ci.hi;
  return ci;
}

ConfidenceInterval ci_fixed_k_feasible(const SpotEstimate& est, const BetaEstimate& beta_hat,
                                       double alpha, QuantileTableCache& cache, BoundMethod method) {
  return ci_fixed_k(est, snap_beta(beta_hat.value), alpha, cache, method);
}

ConfidenceInterval ci_large_k_gauss(const SpotEstimate& est, Transform f, double alpha) {
  check_alpha(alpha);
  require_normalized(est, "ci_large_k_gauss");
  const double beta = *est.beta_used;
  const bool diff = est.kind == EstimatorKind::second_order;
  const CouplingKind kind = large_k_regime(beta, est.p, diff);
  if (kind != CouplingKind::largek_gauss && kind != CouplingKind::largek_gauss_diff) {
    throw RegimeError("ci_large_k_gauss: needs p < beta/2; use the stable or boundary interval");
  }
  const double c = diff ? moment_constant_c_tilde(beta, est.p) : moment_constant_c(beta, est.p);
  const double c2 = diff ? moment_constant_c_tilde(beta, 2.0 * est.p) : moment_constant_c(beta, 2.0 * est.p);
  const double sd = std::sqrt(c2 / (c * c) - 1.0);
  const double z = normal_quantile(1.0 - 0.5 * alpha);
  const double half = z * sd / std::sqrt(static_cast<double>(rate_terms(est)));
  return f_scale_interval(est, f, alpha, kind, half, -half);
}

ConfidenceInterval ci_large_k_stable(const SpotEstimate& est, Transform f, double alpha,
                                     QuantileTableCache& cache, BoundMethod tail_split) {
  check_alpha(alpha);
  require_normalized(est, "ci_large_k_stable");
  const double beta = *est.beta_used;
  const bool diff = est.kind == EstimatorKind::second_order;
  const CouplingKind kind = large_k_regime(beta, est.p, diff);
  if (kind != CouplingKind::largek_stable && kind != CouplingKind::largek_stable_diff) {
    throw RegimeError("ci_large_k_stable: needs beta/2 < p < beta");
  }
  const auto table = cache.get(CouplingLaw{kind, beta, est.p, 0});
  const auto [q_lo, q_hi] = limit_quantiles(*table, alpha, tail_split);
  const double rate = std::pow(static_cast<double>(rate_terms(est)), -(1.0 - est.p / beta));
  return f_scale_interval(est, f, alpha, kind, rate * q_hi, rate * q_lo);
}

ConfidenceInterval ci_boundary_gauss(const SpotEstimate& est, Transform f, double alpha) {
  check_alpha(alpha);
  require_normalized(est, "ci_boundary_gauss");
  const double beta = *est.beta_used;
  if (std::abs(est.p - 0.5 * beta) >= kBoundaryBand) {
    throw RegimeError("ci_boundary_gauss: needs p = beta/2");
  }
  const bool diff = est.kind == EstimatorKind::second_order;
  const double terms = static_cast<double>(rate_terms(est));
  if (terms < 2.0) throw ParameterError("ci_boundary_gauss: block too small for the log rate");
  const double z = normal_quantile(1.0 - 0.5 * alpha);
  const double half = z * std::sqrt(boundary_variance(beta, diff) / (terms * std::log(terms)));
  return f_scale_interval(est, f, alpha,
                          diff ? CouplingKind::boundary_gauss_diff : CouplingKind::boundary_gauss, half,
                          -half);
}

}  // namespace spotvol
