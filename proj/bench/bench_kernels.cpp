#include <benchmark/benchmark.h>

#include "spotvol/harness.hpp"
#include "spotvol/inference.hpp"

namespace {

using spotvol::Execution;

Execution execution_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_CouplingSample(benchmark::State& state) {
  const spotvol::CouplingLaw law{spotvol::CouplingKind::fixed_k_first, 1.6, 1.0, 15};
  for (auto _ : state) {
    auto table = spotvol::coupling_sample(law, 200'000, 7, execution_of(state));
    benchmark::DoNotOptimize(table.sorted_sample().data());
  }
  state.SetItemsProcessed(state.iterations() * 200'000);
}
BENCHMARK(BM_CouplingSample)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

void BM_CoverageReplicates(benchmark::State& state) {
  spotvol::ExperimentConfig cfg;
  cfg.p_list = {1.0};
  cfg.k_list = {15};
  cfg.replications = 500;
  cfg.table_size = 100'000;
  cfg.seed = 11;
  cfg.execution = execution_of(state);
  for (auto _ : state) {
    auto rows = spotvol::run_coverage_experiment(cfg);
    benchmark::DoNotOptimize(rows.data());
  }
  state.SetItemsProcessed(state.iterations() * cfg.replications);
}
BENCHMARK(BM_CoverageReplicates)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
