#include <benchmark/benchmark.h>

#include <random>

#include "polykam/mechanism.hpp"

using namespace polykam;

namespace {

CostMatrix random_cost(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> e(n * n);
  for (double& v : e) v = unif(rng);
  return CostMatrix(n, std::move(e));
}

void BM_compose_costs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CostMatrix a = random_cost(n, 1), b = random_cost(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(compose_costs(a, b));
  state.SetComplexityN(state.range(0));
}

void BM_lax_oleinik(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CostMatrix a = random_cost(n, 3);
  const GridFunction u(n, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(lax_oleinik(a, u));
}

void BM_tropical_eigenvalue(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CostMatrix a = random_cost(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(tropical_eigenvalue(a));
  state.SetComplexityN(state.range(0));
}

void BM_peierls_closure_twist(benchmark::State& state) {
  const GridSpec grid{static_cast<std::size_t>(state.range(0)), 2};
  const CostMatrix a = build_cost_twist(TwistGenerator::standard(2.0), 0.0, grid);
  for (auto _ : state) benchmark::DoNotOptimize(peierls_closure(a));
}

void BM_build_cost_twist(benchmark::State& state) {
  const GridSpec grid{static_cast<std::size_t>(state.range(0)), 2};
  for (auto _ : state) benchmark::DoNotOptimize(build_cost_twist(TwistGenerator::standard(2.0), 0.3, grid));
}

void BM_mechanism_step(benchmark::State& state) {
  const GridSpec grid{static_cast<std::size_t>(state.range(0)), 2};
  std::vector<TwistGenerator> family{TwistGenerator::pure_twist(), TwistGenerator::standard(2.0)};
  FamilyCostCache cache(family, grid);
  const OperatorWord word = OperatorWord::compose(OperatorWord::leaf(0), OperatorWord::leaf(1));
  const Pseudograph g{0.0, GridFunction(grid.n, 0.0)};
  for (auto _ : state) benchmark::DoNotOptimize(mechanism_step(g, word, 0.02, cache.provider()));
}

}  // namespace

BENCHMARK(BM_compose_costs)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNCubed);
BENCHMARK(BM_lax_oleinik)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_tropical_eigenvalue)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNCubed);
BENCHMARK(BM_build_cost_twist)->Arg(128)->Arg(256);
BENCHMARK(BM_peierls_closure_twist)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mechanism_step)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
