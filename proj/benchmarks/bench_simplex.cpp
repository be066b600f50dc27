#include <benchmark/benchmark.h>

#include <random>

#include "stealthrisk/game.hpp"

using namespace stealthrisk;

static void BM_SolveMixedNash(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  PayoffMatrix pm;
  for (int i = 0; i < n; ++i) {
    pm.attack_actions.push_back(i);
    pm.monitor_actions.push_back(i);
  }
  pm.entries.resize(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) pm.entries(r, c) = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_mixed_nash(pm).value);
}
BENCHMARK(BM_SolveMixedNash)->Arg(4)->Arg(9)->Arg(32);

BENCHMARK_MAIN();
