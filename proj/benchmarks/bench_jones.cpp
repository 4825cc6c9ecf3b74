#include "rectify/beta.hpp"
#include "rectify/jones.hpp"

#include <benchmark/benchmark.h>

#include <numeric>

using namespace rect;

static void BM_Beta2Window(benchmark::State& state) {
  const auto mu = generate("circle", GenParams{}, static_cast<int>(state.range(0)), 0);
  const Ball window{mu.atoms.col(0), 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(beta2(mu, window, 2.0));
}
BENCHMARK(BM_Beta2Window)->RangeMultiplier(4)->Range(256, 16384);

static void BM_ClassifyCantor(benchmark::State& state) {
  GenParams p;
  p.depth = 8;
  const auto mu = generate("cantor4", p, 1, 0);
  const auto fam = build_family(mu, 0, 14);
  std::vector<std::size_t> pts(200);
  std::iota(pts.begin(), pts.end(), 0);
  for (auto& i : pts) i *= 97;
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(classify(mu, fam, pts, kDefaultSlopeThreshold, threads));
}
BENCHMARK(BM_ClassifyCantor)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
