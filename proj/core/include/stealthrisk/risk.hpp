#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "stealthrisk/impact.hpp"
#include "stealthrisk/netgraph.hpp"

namespace stealthrisk {

struct VertexPair {
  int attack = 0;   // 0-based
  int monitor = 0;  // 0-based

  auto operator<=>(const VertexPair&) const = default;
  // "a10-m6" with 1-based labels.
  std::string label() const;
};

struct ScenarioConfig {
  double epsilon1 = 0.06;
  double beta1 = 0.08;
  int m1 = 450;
  std::vector<double> risk_levels{0.08, 0.15};
  std::uint64_t master_seed = 2023;

  // Throws ConfigError on out-of-range parameters; the sample-count
  // certificate is only enforced when `enforce_sample_bound` is set.
  void validate(bool enforce_sample_bound = true) const;
};

int required_samples(double epsilon1, double beta1);

// k-th smallest value with k = ceil(M (1 - beta)); +inf entries sort last.
double empirical_var(std::span<const double> values, double beta);

bool boundedness_check(std::span<const double> values, double beta1);

struct RiskEstimate {
  VertexPair pair;
  std::vector<double> sample_values;    // in sample order; +inf for Unbounded
  std::vector<UnboundedCause> causes;   // per sample
  std::map<double, double> var_by_level;
  int bounded_count = 0;
  int failed_samples = 0;  // solver failures, counted as Unbounded
  bool evaluated = true;   // false for pairs skipped by column gating

  bool bounded_at(double beta1) const;
};

// Thread-safe per-sample result store keyed by (seed, sample index, a, m).
class ImpactCache {
 public:
  struct Entry {
    double value = kUnbounded;
    UnboundedCause cause = UnboundedCause::None;
    bool failed = false;
  };

  bool lookup(std::uint64_t seed, int sample_index, VertexPair pair, Entry& out) const;
  void store(std::uint64_t seed, int sample_index, VertexPair pair, const Entry& entry);
  std::size_t size() const;

 private:
  using Key = std::tuple<std::uint64_t, int, int, int>;
  mutable std::mutex mutex_;
  std::map<Key, Entry> entries_;
};

struct RiskOptions {
  double alarm_threshold = 1.0;
  double gamma_cap = 1e6;
  ImpactOptions impact;
  int threads = 1;
  // Record solver failures and keep going instead of throwing.
  bool continue_on_failure = false;
};

// Fills var_by_level and bounded_count from sample_values.
void aggregate(RiskEstimate& estimate, const std::vector<double>& levels);

RiskEstimate estimate_pair_risk(const UncertainNetwork& net, VertexPair pair,
                                const ScenarioConfig& cfg, const RiskOptions& options = {},
                                ImpactCache* cache = nullptr);

// Evaluates several pairs over one shared sample sweep. Work is spread over
// `options.threads` workers; results do not depend on the thread count.
std::vector<RiskEstimate> estimate_risks(const UncertainNetwork& net,
                                         const std::vector<VertexPair>& pairs,
                                         const ScenarioConfig& cfg, const RiskOptions& options = {},
                                         ImpactCache* cache = nullptr,
                                         const std::function<void(int, int)>& progress = {});

// Placeholder estimate for a pair whose monitor column is gated out.
RiskEstimate skipped_estimate(VertexPair pair, const ScenarioConfig& cfg);

}  // namespace stealthrisk
