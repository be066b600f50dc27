#include <benchmark/benchmark.h>

#include "stealthrisk/config.hpp"
#include "stealthrisk/netgraph.hpp"

using namespace stealthrisk;

static void BM_SampleLaplacian(benchmark::State& state) {
  const auto net = build_network(parse_config(fixture_config_text()).network);
  int i = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_laplacian(net, 2023, i++).matrix.data());
}
BENCHMARK(BM_SampleLaplacian);

BENCHMARK_MAIN();
