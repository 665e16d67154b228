#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "subpop/cvar.hpp"
#include "subpop/estimator.hpp"
#include "subpop/learners.hpp"
#include "subpop/rng.hpp"
#include "subpop/simulation.hpp"

using namespace subpop;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = 10.0 * rng.uniform01();
  return v;
}

void BM_EmpiricalCvar(benchmark::State& state) {
  const auto v = random_vector(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_cvar(v, 0.3).value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EmpiricalCvar)->Arg(1000)->Arg(100000)->Arg(1000000);

void BM_HigherOrderCvar(benchmark::State& state) {
  const auto v = random_vector(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(higher_order_cvar(v, 0.3, 2.0));
  }
}
BENCHMARK(BM_HigherOrderCvar)->Arg(1000)->Arg(100000);

void BM_BoostedFit(benchmark::State& state) {
  SimConfig sim;
  sim.n = static_cast<std::size_t>(state.range(0));
  const auto ds = simulate_dataset(sim);
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), 0);
  LearnerParams params;
  params.boost.rounds = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fit_conditional_risk(ds, rows, params, LearnerKind::boosted_stumps));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BoostedFit)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_KnnPredict(benchmark::State& state) {
  SimConfig sim;
  sim.n = static_cast<std::size_t>(state.range(0));
  const auto ds = simulate_dataset(sim);
  std::vector<std::size_t> rows(ds.size());
  std::iota(rows.begin(), rows.end(), 0);
  const auto model = fit_conditional_risk(ds, rows, {}, LearnerKind::knn);
  const std::vector<double> query = {0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(query));
  }
}
BENCHMARK(BM_KnnPredict)->Arg(1000)->Arg(10000);

void BM_Estimate(benchmark::State& state) {
  SimConfig sim;
  sim.n = static_cast<std::size_t>(state.range(0));
  const auto ds = simulate_dataset(sim);
  EvalConfig cfg;
  cfg.alpha = 0.3;
  cfg.k_folds = 2;
  cfg.params.boost.rounds = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate(ds, cfg).omega);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Estimate)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  SimConfig sim;
  sim.n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_dataset(sim).size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
