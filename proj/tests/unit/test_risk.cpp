#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "stealthrisk/risk.hpp"

using namespace stealthrisk;

namespace {

NetworkDescription small_network(Interval bound) {
  NetworkDescription d;
  d.n_vertices = 5;
  d.target = 5;
  d.default_weight = -2.0;
  d.default_bound = bound;
  d.self_loop_gains = {0.5};
  d.edges = {{1, 2, {}, {}}, {2, 3, {}, {}}, {3, 4, {}, {}}, {4, 5, {}, {}}, {1, 3, {}, {}}};
  return d;
}

ScenarioConfig small_scenario(int m1) {
  ScenarioConfig c;
  c.m1 = m1;
  c.risk_levels = {0.05, 0.1, 0.3};
  c.master_seed = 77;
  return c;
}

}  // namespace

TEST_CASE("sample-size certificate") {
  CHECK(required_samples(0.06, 0.08) == 448);
  CHECK(450 >= required_samples(0.06, 0.08));
  CHECK(required_samples(0.1, 0.05) == 185);
  // Independent evaluation of the bound.
  CHECK(required_samples(0.06, 0.08) == static_cast<int>(std::ceil(std::log(2 / 0.08) / (2 * 0.06 * 0.06))));
  int previous = required_samples(0.02, 0.08);
  for (double eps = 0.03; eps < 0.3; eps += 0.01) {
    const int r = required_samples(eps, 0.08);
    CHECK(r < previous);
    previous = r;
  }
  CHECK_THROWS_AS(required_samples(0.0, 0.08), ConfigError);
  CHECK_THROWS_AS(required_samples(0.06, 1.0), ConfigError);
}

TEST_CASE("empirical VaR picks the ceil(M (1 - beta))-th order statistic") {
  std::vector<double> v{7, 3, 10, 1, 9, 2, 8, 5, 6, 4};
  CHECK(empirical_var(v, 0.15) == 9);
  std::vector<double> same(17, 2.5);
  for (double beta : {0.01, 0.15, 0.5, 0.99}) CHECK(empirical_var(same, beta) == 2.5);

  std::vector<double> tail{1, 2, 3, 4, 5, 6, 7, 8, kUnbounded, kUnbounded};
  CHECK(is_unbounded(empirical_var(tail, 0.15)));
  CHECK(empirical_var(tail, 0.2) == 8);

  std::mt19937_64 rng(8);
  std::vector<double> r(200);
  for (auto& x : r) x = static_cast<double>(rng() % 100000) / 7.0;
  CHECK(empirical_var(r, 1e-6) == *std::max_element(r.begin(), r.end()));
  CHECK(empirical_var(r, 1 - 1e-6) == *std::min_element(r.begin(), r.end()));
  // Brute-force order statistic on a sorted copy.
  auto sorted = r;
  std::sort(sorted.begin(), sorted.end());
  for (double beta : {0.05, 0.08, 0.15, 0.5}) {
    const int k = static_cast<int>(std::ceil(200 * (1 - beta) - 1e-9));
    CHECK(empirical_var(r, beta) == sorted[static_cast<std::size_t>(k - 1)]);
  }
}

TEST_CASE("boundedness check") {
  std::vector<double> v(450, 1.0);
  std::fill(v.begin() + 414, v.end(), kUnbounded);
  CHECK(boundedness_check(v, 0.08));
  v[413] = kUnbounded;
  CHECK_FALSE(boundedness_check(v, 0.08));
  CHECK_FALSE(boundedness_check(std::vector<double>(10, kUnbounded), 0.08));
  CHECK(boundedness_check(std::vector<double>(10, 3.0), 0.08));
}

TEST_CASE("scenario validation") {
  ScenarioConfig c;
  CHECK_NOTHROW(c.validate());
  c.m1 = 447;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_NOTHROW(c.validate(false));
  c.m1 = 450;
  c.risk_levels = {0.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("pair labels") {
  CHECK(VertexPair{9, 5}.label() == "a10-m6");
  CHECK(VertexPair{0, 1} < VertexPair{1, 0});
}

TEST_CASE("zero-width uncertainty gives one value at every level") {
  auto net = build_network(small_network({0.0, 0.0}));
  auto cfg = small_scenario(12);
  auto est = estimate_pair_risk(net, {0, 1}, cfg);
  REQUIRE(est.bounded_count == 12);
  const double first = est.sample_values.front();
  for (double v : est.sample_values) CHECK(v == doctest::Approx(first).epsilon(1e-9));
  for (const auto& [beta, var] : est.var_by_level) CHECK(var == doctest::Approx(first).epsilon(1e-9));
  auto nominal = solve_impact({SystemRealization::from_laplacian(nominal_laplacian(net).matrix, 0, 4, 1)});
  CHECK(first == doctest::Approx(nominal.value).epsilon(1e-7));
}

TEST_CASE("VaR is antitone in beta and deterministic across thread counts") {
  auto net = build_network(small_network({-0.5, 0.5}));
  auto cfg = small_scenario(30);
  std::vector<VertexPair> pairs{{0, 1}, {0, 2}, {2, 1}, {3, 0}};
  RiskOptions one;
  RiskOptions three;
  three.threads = 3;
  auto a = estimate_risks(net, pairs, cfg, one);
  auto b = estimate_risks(net, pairs, cfg, three);
  REQUIRE(a.size() == pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    CHECK(a[k].sample_values == b[k].sample_values);
    CHECK(a[k].var_by_level == b[k].var_by_level);
    double prev = kUnbounded;
    for (const auto& [beta, var] : a[k].var_by_level) {
      CHECK(var <= prev);
      prev = var;
    }
  }
  // (3, 0) has the monitor two hops out and the target one hop: unbounded.
  CHECK(a[3].bounded_count == 0);
  CHECK(a[3].causes[0] == UnboundedCause::RelativeDegree);
  CHECK_FALSE(a[3].bounded_at(0.08));
}

TEST_CASE("cache short-circuits repeated solves") {
  auto net = build_network(small_network({-0.5, 0.5}));
  auto cfg = small_scenario(6);
  ImpactCache cache;
  auto first = estimate_pair_risk(net, {0, 1}, cfg, {}, &cache);
  CHECK(cache.size() == 6);
  auto second = estimate_pair_risk(net, {0, 1}, cfg, {}, &cache);
  CHECK(cache.size() == 6);
  CHECK(first.sample_values == second.sample_values);
}

TEST_CASE("solver failures are recorded as unbounded when asked to continue") {
  auto net = build_network(small_network({-0.5, 0.5}));
  auto cfg = small_scenario(4);
  RiskOptions o;
  o.impact.solver.max_iterations = 1;
  o.impact.solver.near_optimal_tolerance = 0.0;
  CHECK_THROWS_AS(estimate_pair_risk(net, {0, 1}, cfg, o), SolverFailure);
  o.continue_on_failure = true;
  auto est = estimate_pair_risk(net, {0, 1}, cfg, o);
  CHECK(est.failed_samples == 4);
  CHECK(est.bounded_count == 0);
}

TEST_CASE("pairs touching the target are rejected") {
  auto net = build_network(small_network({-0.5, 0.5}));
  CHECK_THROWS_AS(estimate_pair_risk(net, {4, 1}, small_scenario(3)), ConfigError);
  CHECK_THROWS_AS(estimate_pair_risk(net, {0, 7}, small_scenario(3)), ConfigError);
}

TEST_CASE("skipped estimates carry no values") {
  auto e = skipped_estimate({1, 2}, small_scenario(3));
  CHECK_FALSE(e.evaluated);
  for (const auto& [beta, var] : e.var_by_level) CHECK(std::isnan(var));
}
