#pragma once

#include <random>
#include <vector>

#include "stealthrisk/netgraph.hpp"
#include "stealthrisk/sysid.hpp"

namespace testing_support {

using stealthrisk::Matrix;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int pick(std::mt19937_64& rng, int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

// Random connected graph: a random spanning tree plus extra edges with
// probability p. Couplings in [0.5, 2], self-loop gains in [0.2, 1].
inline stealthrisk::UncertainNetwork random_network(std::mt19937_64& rng, int n, double p = 0.4,
                                                    int target = 0) {
  std::vector<stealthrisk::Edge> edges;
  std::vector<std::vector<char>> used(n, std::vector<char>(n, 0));
  for (int v = 1; v < n; ++v) {
    int u = pick(rng, v);
    used[u][v] = used[v][u] = 1;
    edges.push_back({u, v, -uniform(rng, 0.5, 2.0), {0.0, 0.0}});
  }
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (!used[u][v] && uniform(rng, 0, 1) < p) edges.push_back({u, v, -uniform(rng, 0.5, 2.0), {0.0, 0.0}});
    }
  }
  stealthrisk::Vector theta(n);
  for (int i = 0; i < n; ++i) theta[i] = uniform(rng, 0.2, 1.0);
  return stealthrisk::UncertainNetwork(n, edges, theta, target);
}

inline Matrix random_laplacian(std::mt19937_64& rng, int n, double p = 0.4) {
  return stealthrisk::nominal_laplacian(random_network(rng, n, p)).matrix;
}

// Brute-force Markov parameter e_out^T A^k e_in.
inline double markov(const Matrix& a, int in, int out, int k) {
  stealthrisk::Vector v = stealthrisk::Vector::Unit(a.rows(), in);
  for (int i = 0; i < k; ++i) v = a * v;
  return v[out];
}

}  // namespace testing_support
