#include "stealthrisk/netgraph.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <random>
#include <sstream>

namespace stealthrisk {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 53 random mantissa bits; std::uniform_real_distribution is not portable
// across standard libraries, and bundles must be byte-identical.
double unit_draw(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

UncertainNetwork::UncertainNetwork(int n_vertices, std::vector<Edge> edges,
                                   Vector self_loop_gains, int target)
    : n_(n_vertices), edges_(std::move(edges)), theta_(std::move(self_loop_gains)),
      target_(target) {
  if (n_ < 1) throw ConfigError("network needs at least one vertex");
  if (target_ < 0 || target_ >= n_) {
    throw ConfigError("target vertex " + std::to_string(target_ + 1) + " out of range 1.." +
                      std::to_string(n_));
  }
  if (theta_.size() != n_) throw ConfigError("self-loop gain vector has wrong length");
  for (int i = 0; i < n_; ++i) {
    if (!(theta_[i] > 0.0) || !std::isfinite(theta_[i])) {
      throw ConfigError("self-loop gain of vertex " + std::to_string(i + 1) +
                        " must be positive");
    }
  }
  for (auto& e : edges_) {
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.u < 0 || e.v >= n_) throw ConfigError("edge endpoint out of range");
    if (e.u == e.v) throw ConfigError("self-edge on vertex " + std::to_string(e.u + 1));
    if (!std::isfinite(e.bound.lo) || !std::isfinite(e.bound.hi) || e.bound.lo > e.bound.hi) {
      throw ConfigError("edge (" + std::to_string(e.u + 1) + "," + std::to_string(e.v + 1) +
                        ") has an invalid uncertainty interval");
    }
    if (!(e.nominal_weight + e.bound.hi < 0.0)) {
      throw ConfigError("edge (" + std::to_string(e.u + 1) + "," + std::to_string(e.v + 1) +
                        ") coupling must stay negative over its interval");
    }
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.u, x.v) < std::tie(y.u, y.v); });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].u == edges_[k - 1].u && edges_[k].v == edges_[k - 1].v) {
      throw ConfigError("duplicate edge (" + std::to_string(edges_[k].u + 1) + "," +
                        std::to_string(edges_[k].v + 1) + ")");
    }
  }
  auto dist = distances_from(0);
  for (int i = 0; i < n_; ++i) {
    if (dist[i] < 0) {
      throw ConfigError("graph is disconnected: vertex " + std::to_string(i + 1) +
                        " unreachable from vertex 1");
    }
  }
}

std::vector<std::vector<int>> UncertainNetwork::adjacency() const {
  std::vector<std::vector<int>> adj(n_);
  for (const auto& e : edges_) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return adj;
}

std::vector<int> UncertainNetwork::distances_from(int source) const {
  auto adj = adjacency();
  std::vector<int> dist(n_, -1);
  std::queue<int> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    for (int w : adj[u]) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        frontier.push(w);
      }
    }
  }
  return dist;
}

UncertainNetwork UncertainNetwork::with_gain_offset(double theta0) const {
  Vector theta = theta_.array() + theta0;
  return UncertainNetwork(n_, edges_, theta, target_);
}

UncertainNetwork UncertainNetwork::scaled(double factor) const {
  if (!(factor > 0.0)) throw ConfigError("scale factor must be positive");
  auto edges = edges_;
  for (auto& e : edges) {
    e.nominal_weight *= factor;
    e.bound.lo *= factor;
    e.bound.hi *= factor;
  }
  return UncertainNetwork(n_, edges, theta_ * factor, target_);
}

UncertainNetwork build_network(const NetworkDescription& desc) {
  const int n = desc.n_vertices;
  if (n < 1) throw ConfigError("n_vertices must be positive");
  if (desc.target < 1 || desc.target > n) {
    throw ConfigError("target vertex " + std::to_string(desc.target) + " out of range 1.." +
                      std::to_string(n));
  }

  Vector theta(n);
  if (desc.self_loop_gains.size() == 1) {
    theta.setConstant(desc.self_loop_gains.front());
  } else if (static_cast<int>(desc.self_loop_gains.size()) == n) {
    for (int i = 0; i < n; ++i) theta[i] = desc.self_loop_gains[i];
  } else {
    throw ConfigError("self_loop_gains must hold 1 or n_vertices values");
  }

  std::map<std::pair<int, int>, Edge> merged;
  for (const auto& entry : desc.edges) {
    if (entry.from < 1 || entry.from > n || entry.to < 1 || entry.to > n) {
      throw ConfigError("edge (" + std::to_string(entry.from) + "," + std::to_string(entry.to) +
                        ") references a vertex outside 1.." + std::to_string(n));
    }
    Edge e;
    e.u = std::min(entry.from, entry.to) - 1;
    e.v = std::max(entry.from, entry.to) - 1;
    e.nominal_weight = entry.weight.value_or(desc.default_weight);
    e.bound = entry.bound.value_or(desc.default_bound);
    auto [it, inserted] = merged.emplace(std::make_pair(e.u, e.v), e);
    if (!inserted) {
      const Edge& prev = it->second;
      if (prev.nominal_weight != e.nominal_weight || prev.bound.lo != e.bound.lo ||
          prev.bound.hi != e.bound.hi) {
        throw ConfigError("asymmetric weights on edge (" + std::to_string(e.u + 1) + "," +
                          std::to_string(e.v + 1) + ")");
      }
    }
  }
  std::vector<Edge> edges;
  edges.reserve(merged.size());
  for (auto& [key, e] : merged) edges.push_back(e);
  return UncertainNetwork(n, std::move(edges), theta, desc.target - 1);
}

std::uint64_t derive_subseed(std::uint64_t master_seed, int sample_index) {
  return splitmix64(splitmix64(master_seed) ^ static_cast<std::uint64_t>(sample_index));
}

Matrix assemble_laplacian(const UncertainNetwork& net, const Vector& deltas) {
  const auto& edges = net.edges();
  if (deltas.size() != static_cast<Eigen::Index>(edges.size())) {
    throw Error("perturbation vector length does not match edge count");
  }
  const int n = net.n_vertices();
  Matrix l = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    double w = e.nominal_weight + deltas[static_cast<Eigen::Index>(k)];
    l(e.u, e.v) = w;
    l(e.v, e.u) = w;
    l(e.u, e.u) -= w;
    l(e.v, e.v) -= w;
  }
  l.diagonal() += net.self_loop_gains();
  return l;
}

SampledLaplacian sample_laplacian(const UncertainNetwork& net, std::uint64_t master_seed,
                                  int sample_index, const EdgeSampler& sampler) {
  if (sample_index < 1) throw Error("sample index must be >= 1");
  SampledLaplacian out;
  out.sample_index = sample_index;
  out.seed_trace = derive_subseed(master_seed, sample_index);
  std::mt19937_64 gen(out.seed_trace);
  const auto& edges = net.edges();
  Vector deltas(static_cast<Eigen::Index>(edges.size()));
  for (std::size_t k = 0; k < edges.size(); ++k) {
    double u = unit_draw(gen);
    const Edge& e = edges[k];
    deltas[static_cast<Eigen::Index>(k)] =
        sampler ? sampler(e, u) : e.bound.lo + e.bound.width() * u;
  }
  out.matrix = assemble_laplacian(net, deltas);

  // Symmetric, so -L is Hurwitz exactly when L is positive definite.
  Eigen::LLT<Matrix> chol(out.matrix);
  if (chol.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "sample " << sample_index << " produced a Laplacian that is not positive definite";
    throw Error(msg.str());
  }
  return out;
}

SampledLaplacian nominal_laplacian(const UncertainNetwork& net) {
  SampledLaplacian out;
  out.sample_index = 0;
  out.matrix = assemble_laplacian(net, Vector::Zero(static_cast<Eigen::Index>(net.edges().size())));
  return out;
}

std::vector<SampledLaplacian> sample_laplacians(const UncertainNetwork& net,
                                                std::uint64_t master_seed, int count) {
  std::vector<SampledLaplacian> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 1; i <= count; ++i) out.push_back(sample_laplacian(net, master_seed, i));
  return out;
}

}  // namespace stealthrisk
