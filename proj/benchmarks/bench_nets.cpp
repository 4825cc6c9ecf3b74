#include "rectify/nets.hpp"

#include <benchmark/benchmark.h>

using namespace rect;

static void BM_Traversal(benchmark::State& state) {
  const auto mu = generate("circle", GenParams{}, static_cast<int>(state.range(0)), 0);
  for (auto _ : state) benchmark::DoNotOptimize(farthest_point_traversal(mu.atoms, 0.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Traversal)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

static void BM_CantorFamily(benchmark::State& state) {
  GenParams p;
  p.depth = static_cast<int>(state.range(0));
  const auto mu = generate("cantor4", p, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(build_family(mu, 0, 2 * p.depth - 2));
}
BENCHMARK(BM_CantorFamily)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

static void BM_OverlapTable(benchmark::State& state) {
  const auto mu = generate("segment", GenParams{}, 1000, 0);
  const auto fam = build_family(mu, 0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(overlap_table(fam, mu));
}
BENCHMARK(BM_OverlapTable)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
