#include <doctest.h>

#include <random>

#include "stealthrisk/netgraph.hpp"
#include "support.hpp"

using namespace stealthrisk;

namespace {

NetworkDescription path2(Interval bound, std::vector<double> theta) {
  NetworkDescription d;
  d.n_vertices = 2;
  d.target = 2;
  d.default_weight = -1.0;
  d.default_bound = bound;
  d.self_loop_gains = std::move(theta);
  d.edges = {{1, 2, std::nullopt, std::nullopt}};
  return d;
}

NetworkDescription ring10() {
  NetworkDescription d;
  d.n_vertices = 10;
  d.target = 5;
  d.default_weight = -10.0;
  d.default_bound = {-0.5, 0.5};
  d.self_loop_gains = {0.5};
  for (int i = 1; i <= 10; ++i) d.edges.push_back({i, i % 10 + 1, std::nullopt, std::nullopt});
  d.edges.push_back({1, 6, std::nullopt, std::nullopt});
  return d;
}

}  // namespace

TEST_CASE("build_network accepts the 10-vertex style description") {
  auto net = build_network(ring10());
  CHECK(net.n_vertices() == 10);
  CHECK(net.target() == 4);
  CHECK(net.edges().size() == 11);
  for (const auto& e : net.edges()) {
    CHECK(e.nominal_weight == -10.0);
    CHECK(e.bound.lo == -0.5);
    CHECK(e.bound.hi == 0.5);
  }
}

TEST_CASE("build_network accepts a degenerate two-vertex path") {
  auto net = build_network(path2({0.0, 0.0}, {1.0}));
  CHECK(net.edges().size() == 1);
}

TEST_CASE("build_network rejects invalid descriptions") {
  NetworkDescription d;
  d.n_vertices = 3;
  d.target = 1;
  d.self_loop_gains = {0.5};
  d.edges = {{1, 2, std::nullopt, std::nullopt}};
  CHECK_THROWS_AS(build_network(d), ConfigError);

  auto bad_theta = path2({0.0, 0.0}, {1.0, 0.0});
  CHECK_THROWS_AS(build_network(bad_theta), ConfigError);

  auto bad_target = path2({0.0, 0.0}, {1.0});
  bad_target.target = 3;
  CHECK_THROWS_AS(build_network(bad_target), ConfigError);

  auto asym = path2({0.0, 0.0}, {1.0});
  asym.edges.push_back({2, 1, -2.0, std::nullopt});
  CHECK_THROWS_AS(build_network(asym), ConfigError);

  auto mirrored = path2({0.0, 0.0}, {1.0});
  mirrored.edges.push_back({2, 1, -1.0, std::nullopt});
  CHECK_NOTHROW(build_network(mirrored));

  auto positive = path2({-0.5, 1.5}, {1.0});
  CHECK_THROWS_AS(build_network(positive), ConfigError);
}

TEST_CASE("zero-width intervals reproduce the nominal Laplacian exactly") {
  auto d = ring10();
  d.default_bound = {0.0, 0.0};
  auto net = build_network(d);
  auto s = sample_laplacian(net, 7, 3);
  CHECK(s.matrix == nominal_laplacian(net).matrix);
}

TEST_CASE("sampling is deterministic in (seed, index)") {
  auto net = build_network(ring10());
  auto a = sample_laplacian(net, 99, 12);
  auto b = sample_laplacian(net, 99, 12);
  CHECK(a.matrix == b.matrix);
  CHECK(a.seed_trace == b.seed_trace);
  auto c = sample_laplacian(net, 99, 13);
  CHECK(a.matrix != c.matrix);
  auto d = sample_laplacian(net, 100, 12);
  CHECK(a.matrix != d.matrix);
}

TEST_CASE("two-vertex sample stays inside the interval") {
  auto net = build_network(path2({-0.5, 0.5}, {1.0}));
  for (int i = 1; i <= 200; ++i) {
    auto s = sample_laplacian(net, 5, i);
    const double off = s.matrix(0, 1);
    CHECK(off >= -1.5);
    CHECK(off <= -0.5);
    CHECK(s.matrix(1, 0) == off);
    CHECK(s.matrix(0, 0) == doctest::Approx(-off + 1.0).epsilon(1e-15));
    CHECK(s.matrix(1, 1) == doctest::Approx(-off + 1.0).epsilon(1e-15));
  }
}

TEST_CASE("nominal diagonal equals 10 deg(i) + 0.5") {
  auto net = build_network(ring10());
  auto l = nominal_laplacian(net).matrix;
  auto adj = net.adjacency();
  for (int i = 0; i < 10; ++i) CHECK(l(i, i) == doctest::Approx(10.0 * adj[i].size() + 0.5));
  CHECK(l.isApprox(l.transpose(), 0.0));
}

TEST_CASE("single edge nominal matrix") {
  NetworkDescription d = path2({0.0, 0.0}, {0.3, 0.7});
  d.default_weight = -2.5;
  auto l = nominal_laplacian(build_network(d)).matrix;
  CHECK(l(0, 0) == doctest::Approx(2.5 + 0.3));
  CHECK(l(1, 1) == doctest::Approx(2.5 + 0.7));
  CHECK(l(0, 1) == doctest::Approx(-2.5));
  CHECK(l(1, 0) == doctest::Approx(-2.5));
}

TEST_CASE("every sample is symmetric with a Hurwitz negation") {
  auto net = build_network(ring10());
  for (const auto& s : sample_laplacians(net, 2023, 50)) {
    CHECK(s.matrix == s.matrix.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s.matrix);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("custom edge sampler hook") {
  auto net = build_network(ring10());
  auto s = sample_laplacian(net, 1, 1, [](const Edge& e, double) { return e.bound.hi; });
  for (const auto& e : net.edges()) CHECK(s.matrix(e.u, e.v) == doctest::Approx(-9.5));
}

TEST_CASE("hop distances") {
  auto net = build_network(ring10());
  auto d = net.distances_from(0);
  CHECK(d[0] == 0);
  CHECK(d[1] == 1);
  CHECK(d[5] == 1);
  CHECK(d[3] == 3);
}
