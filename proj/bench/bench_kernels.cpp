// Serial vs OpenMP kernels. Set OMP_NUM_THREADS to vary the parallel width.

#include <benchmark/benchmark.h>

#include "eml/population.hpp"
#include "eml/solver.hpp"

namespace {

using namespace eml;

const GridAxis kPriceAxis{0.0, 1.0, 2e-3};

void BM_GridSearch_Serial(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        revenue_grid_search_serial({0.4, 0.7}, 0.2, 50, Distribution::uniform(), kPriceAxis, kPriceAxis));
  }
}

void BM_GridSearch_Parallel(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(revenue_grid_search({0.4, 0.7}, 0.2, 50, Distribution::uniform(), kPriceAxis, kPriceAxis));
  }
}

void BM_GridSearchBeta_Serial(benchmark::State& state) {
  const auto beta = Distribution::beta(2, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(revenue_grid_search_serial({0.4, 0.7}, 0.2, 50, beta, kPriceAxis, kPriceAxis));
  }
}

void BM_GridSearchBeta_Parallel(benchmark::State& state) {
  const auto beta = Distribution::beta(2, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(revenue_grid_search({0.4, 0.7}, 0.2, 50, beta, kPriceAxis, kPriceAxis));
  }
}

void BM_SolveCase2_Serial(benchmark::State& state) {
  MarketParams p;
  for (auto _ : state) benchmark::DoNotOptimize(solve_case2_serial(p));
}

void BM_SolveCase2_Parallel(benchmark::State& state) {
  MarketParams p;
  for (auto _ : state) benchmark::DoNotOptimize(solve_case2(p));
}

MarketParams population_params(std::int64_t n) {
  MarketParams p;
  p.n_buyers = static_cast<int>(n);
  p.n_resellers = static_cast<int>(n);
  p.usage = Distribution::uniform();
  return p;
}

void BM_SimulateMarket_Serial(benchmark::State& state) {
  const auto p = population_params(state.range(0));
  const auto pop = sample_population(p, 1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_market_serial(pop, {0.1, 0.5}, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SimulateMarket_Parallel(benchmark::State& state) {
  const auto p = population_params(state.range(0));
  const auto pop = sample_population(p, 1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_market(pop, {0.1, 0.5}, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_GridSearch_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSearch_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSearchBeta_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSearchBeta_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveCase2_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveCase2_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateMarket_Serial)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateMarket_Parallel)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
