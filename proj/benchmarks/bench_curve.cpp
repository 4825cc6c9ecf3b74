#include "rectify/curve.hpp"
#include "rectify/measures.hpp"

#include <benchmark/benchmark.h>

using namespace rect;

static NetHierarchy lipschitz(int n, int k_max) {
  GenParams p;
  p.lipschitz = 1.0;
  p.pieces = 24;
  return hierarchy_from_points(generate("lipschitz_graph", p, n, 0).atoms, 0.5, k_max);
}

static void BM_Annotate(benchmark::State& state) {
  const auto h = lipschitz(static_cast<int>(state.range(0)), 9);
  for (auto _ : state) benchmark::DoNotOptimize(annotate(h));
}
BENCHMARK(BM_Annotate)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

static void BM_Construct(benchmark::State& state) {
  const auto h = lipschitz(static_cast<int>(state.range(0)), 9);
  const auto ann = annotate(h);
  for (auto _ : state) benchmark::DoNotOptimize(construct(h, ann));
}
BENCHMARK(BM_Construct)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

static void BM_SegmentEndToEnd(benchmark::State& state) {
  const auto mu = generate("segment", GenParams{}, 1000, 0);
  for (auto _ : state) {
    const auto h = hierarchy_from_points(mu.atoms, 0.5, 10);
    const auto s = construct(h, annotate(h));
    benchmark::DoNotOptimize(length_accounting(s));
  }
}
BENCHMARK(BM_SegmentEndToEnd)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
