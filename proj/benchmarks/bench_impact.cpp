#include <benchmark/benchmark.h>

#include "stealthrisk/config.hpp"
#include "stealthrisk/impact.hpp"

using namespace stealthrisk;

namespace {

SystemRealization fixture_system(int attack, int monitor) {
  const auto net = build_network(parse_config(fixture_config_text()).network);
  return SystemRealization::from_laplacian(sample_laplacian(net, 2023, 1).matrix, attack, net.target(),
                                           monitor);
}

void BM_SolveImpactJoint(benchmark::State& state) {
  const auto sys = fixture_system(9, 5);
  for (auto _ : state) benchmark::DoNotOptimize(solve_impact({sys}).value);
}
BENCHMARK(BM_SolveImpactJoint)->Unit(benchmark::kMillisecond);

void BM_SolveImpactBisection(benchmark::State& state) {
  const auto sys = fixture_system(9, 5);
  ImpactOptions o;
  o.method = ImpactMethod::Bisection;
  for (auto _ : state) benchmark::DoNotOptimize(solve_impact({sys}, o).value);
}
BENCHMARK(BM_SolveImpactBisection)->Unit(benchmark::kMillisecond);

void BM_FrequencyOracle(benchmark::State& state) {
  const auto sys = fixture_system(9, 5);
  for (auto _ : state) benchmark::DoNotOptimize(impact_oracle_frequency(sys).value);
}
BENCHMARK(BM_FrequencyOracle)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
