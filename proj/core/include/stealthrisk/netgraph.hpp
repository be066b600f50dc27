#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "stealthrisk/common.hpp"

namespace stealthrisk {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Undirected edge with 0-based endpoints, u < v.
struct Edge {
  int u = 0;
  int v = 0;
  double nominal_weight = 0.0;  // off-diagonal Laplacian entry, negative
  Interval bound;               // support of the additive perturbation
};

// Raw network description as written in a config file. Vertices are
// 1-based, and an edge may be listed in both orientations as long as the two
// entries agree.
struct NetworkDescription {
  struct EdgeEntry {
    int from = 0;
    int to = 0;
    std::optional<double> weight;
    std::optional<Interval> bound;
  };

  int n_vertices = 0;
  int target = 0;
  double default_weight = -10.0;
  Interval default_bound{-0.5, 0.5};
  std::vector<double> self_loop_gains;  // one per vertex, or a single uniform value
  std::vector<EdgeEntry> edges;
};

class UncertainNetwork {
 public:
  // Validates connectivity, gain positivity, bound sanity and the target
  // index. Throws ConfigError on violation.
  UncertainNetwork(int n_vertices, std::vector<Edge> edges, Vector self_loop_gains,
                   int target);

  int n_vertices() const { return n_; }
  int target() const { return target_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Vector& self_loop_gains() const { return theta_; }

  std::vector<std::vector<int>> adjacency() const;
  // Hop distances from `source` to every vertex.
  std::vector<int> distances_from(int source) const;

  UncertainNetwork with_gain_offset(double theta0) const;
  // Multiplies weights, bounds and gains by `factor` > 0.
  UncertainNetwork scaled(double factor) const;

 private:
  int n_;
  std::vector<Edge> edges_;
  Vector theta_;
  int target_;
};

UncertainNetwork build_network(const NetworkDescription& desc);

struct SampledLaplacian {
  Matrix matrix;
  int sample_index = 0;
  std::uint64_t seed_trace = 0;
};

// Maps a uniform draw in [0, 1) to a perturbation for one edge. The default
// sampler is the uniform law on the edge's interval.
using EdgeSampler = std::function<double(const Edge&, double unit)>;

std::uint64_t derive_subseed(std::uint64_t master_seed, int sample_index);

Matrix assemble_laplacian(const UncertainNetwork& net, const Vector& deltas);

SampledLaplacian sample_laplacian(const UncertainNetwork& net, std::uint64_t master_seed,
                                  int sample_index, const EdgeSampler& sampler = {});

SampledLaplacian nominal_laplacian(const UncertainNetwork& net);

std::vector<SampledLaplacian> sample_laplacians(const UncertainNetwork& net,
                                                std::uint64_t master_seed, int count);

}  // namespace stealthrisk
