#include "stealthrisk/risk.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <thread>

namespace stealthrisk {

namespace {

// ceil() that forgives representation error just above an integer, e.g.
// 450 * 0.92 = 414.00000000000006.
int ceil_count(double x) { return static_cast<int>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x)))); }

void check_unit_interval(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw ConfigError(std::string(name) + " must lie strictly inside (0, 1)");
  }
}

}  // namespace

std::string VertexPair::label() const {
  return "a" + std::to_string(attack + 1) + "-m" + std::to_string(monitor + 1);
}

void ScenarioConfig::validate(bool enforce_sample_bound) const {
  check_unit_interval(epsilon1, "epsilon1");
  check_unit_interval(beta1, "beta1");
  if (m1 < 1) throw ConfigError("sample count must be positive");
  if (risk_levels.empty()) throw ConfigError("at least one risk level is required");
  for (double b : risk_levels) check_unit_interval(b, "risk level");
  if (enforce_sample_bound) {
    const int need = required_samples(epsilon1, beta1);
    if (m1 < need) {
      throw ConfigError("sample count " + std::to_string(m1) + " is below the required " +
                        std::to_string(need));
    }
  }
}

int required_samples(double epsilon1, double beta1) {
  check_unit_interval(epsilon1, "epsilon1");
  check_unit_interval(beta1, "beta1");
  return ceil_count(std::log(2.0 / beta1) / (2.0 * epsilon1 * epsilon1));
}

double empirical_var(std::span<const double> values, double beta) {
  if (values.empty()) throw Error("empirical_var needs at least one value");
  check_unit_interval(beta, "beta");
  const int m = static_cast<int>(values.size());
  const int k = std::clamp(ceil_count(m * (1.0 - beta)), 1, m);
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  return sorted[static_cast<std::size_t>(k - 1)];
}

bool boundedness_check(std::span<const double> values, double beta1) {
  check_unit_interval(beta1, "beta1");
  const auto finite = std::count_if(values.begin(), values.end(),
                                    [](double v) { return !is_unbounded(v); });
  return finite >= ceil_count(static_cast<double>(values.size()) * (1.0 - beta1));
}

bool RiskEstimate::bounded_at(double beta1) const {
  return evaluated && boundedness_check(sample_values, beta1);
}

bool ImpactCache::lookup(std::uint64_t seed, int sample_index, VertexPair pair, Entry& out) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find({seed, sample_index, pair.attack, pair.monitor});
  if (it == entries_.end()) return false;
  out = it->second;
  return true;
}

void ImpactCache::store(std::uint64_t seed, int sample_index, VertexPair pair, const Entry& entry) {
  std::lock_guard lock(mutex_);
  entries_[{seed, sample_index, pair.attack, pair.monitor}] = entry;
}

std::size_t ImpactCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void aggregate(RiskEstimate& estimate, const std::vector<double>& levels) {
  estimate.bounded_count = static_cast<int>(std::count_if(
      estimate.sample_values.begin(), estimate.sample_values.end(),
      [](double v) { return !is_unbounded(v); }));
  estimate.var_by_level.clear();
  for (double beta : levels) {
    estimate.var_by_level[beta] =
        estimate.evaluated ? empirical_var(estimate.sample_values, beta) : std::nan("");
  }
}

RiskEstimate estimate_pair_risk(const UncertainNetwork& net, VertexPair pair,
                                const ScenarioConfig& cfg, const RiskOptions& options,
                                ImpactCache* cache) {
  return estimate_risks(net, {pair}, cfg, options, cache).front();
}

std::vector<RiskEstimate> estimate_risks(const UncertainNetwork& net,
                                         const std::vector<VertexPair>& pairs,
                                         const ScenarioConfig& cfg, const RiskOptions& options,
                                         ImpactCache* cache,
                                         const std::function<void(int, int)>& progress) {
  const int n = net.n_vertices();
  for (const auto& p : pairs) {
    if (p.attack < 0 || p.attack >= n || p.monitor < 0 || p.monitor >= n) {
      throw ConfigError("pair " + p.label() + " references a vertex outside the network");
    }
    if (p.attack == net.target() || p.monitor == net.target()) {
      throw ConfigError("pair " + p.label() + " uses the target vertex");
    }
  }
  const int m1 = cfg.m1;
  std::vector<RiskEstimate> out(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out[k].pair = pairs[k];
    out[k].sample_values.assign(static_cast<std::size_t>(m1), kUnbounded);
    out[k].causes.assign(static_cast<std::size_t>(m1), UnboundedCause::None);
  }
  std::vector<std::vector<char>> failed(pairs.size(), std::vector<char>(static_cast<std::size_t>(m1), 0));

  std::atomic<int> next{1};
  std::atomic<int> done{0};
  std::mutex error_mutex;
  std::optional<int> error_sample;
  std::exception_ptr error;

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i > m1) return;
      {
        std::lock_guard lock(error_mutex);
        if (error_sample && *error_sample < i) return;
      }
      try {
        std::optional<SampledLaplacian> sample;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
          const VertexPair pair = pairs[k];
          ImpactCache::Entry entry;
          if (!(cache && cache->lookup(cfg.master_seed, i, pair, entry))) {
            if (!sample) sample = sample_laplacian(net, cfg.master_seed, i);
            ImpactProblem prob{SystemRealization::from_laplacian(sample->matrix, pair.attack,
                                                                 net.target(), pair.monitor),
                               options.alarm_threshold, options.gamma_cap};
            try {
              const ImpactResult r = solve_impact(prob, options.impact);
              entry.value = r.value;
              entry.cause = r.cause;
            } catch (const SolverFailure& e) {
              if (!options.continue_on_failure) {
                throw SolverFailure("sample " + std::to_string(i) + ", pair " + pair.label() +
                                    ": " + e.what());
              }
              entry.failed = true;
            }
            if (cache) cache->store(cfg.master_seed, i, pair, entry);
          }
          const auto idx = static_cast<std::size_t>(i - 1);
          out[k].sample_values[idx] = entry.failed ? kUnbounded : entry.value;
          out[k].causes[idx] = entry.cause;
          failed[k][idx] = entry.failed ? 1 : 0;
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error_sample || i < *error_sample) {
          error_sample = i;
          error = std::current_exception();
        }
        continue;
      }
      const int finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(error_mutex);
        progress(finished, m1);
      }
    }
  };

  const int threads = std::clamp(options.threads, 1, std::max(1, m1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out[k].failed_samples = static_cast<int>(std::count(failed[k].begin(), failed[k].end(), 1));
    aggregate(out[k], cfg.risk_levels);
  }
  return out;
}

RiskEstimate skipped_estimate(VertexPair pair, const ScenarioConfig& cfg) {
  RiskEstimate e;
  e.pair = pair;
  e.evaluated = false;
  aggregate(e, cfg.risk_levels);
  return e;
}

}  // namespace stealthrisk
