// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
//
//   acceptance [--cli <path to stealthrisk>] [--only <n>]

#include <algorithm>
#include <chrono>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "stealthrisk/config.hpp"
#include "stealthrisk/impact.hpp"
#include "stealthrisk/pipeline.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace stealthrisk;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

struct Instance {
  SystemRealization sys;
  Verdict verdict;
};

Instance random_instance(std::mt19937_64& rng) {
  for (;;) {
    const int n = 3 + testing_support::pick(rng, 4);
    Matrix l = testing_support::random_laplacian(rng, n, 0.4);
    const int a = testing_support::pick(rng, n);
    const int m = testing_support::pick(rng, n);
    const int tau = testing_support::pick(rng, n);
    if (tau == a || tau == m) continue;
    auto sys = SystemRealization::from_laplacian(l, a, tau, m);
    return {sys, feasibility_verdict(sys)};
  }
}

std::vector<Instance> random_instances(std::uint64_t seed, int count, bool feasible) {
  std::mt19937_64 rng(seed);
  std::vector<Instance> out;
  while (static_cast<int>(out.size()) < count) {
    auto inst = random_instance(rng);
    if ((inst.verdict == Verdict::Feasible) == feasible) out.push_back(inst);
  }
  return out;
}

// Criterion 1
Outcome sample_certificate() {
  const auto t0 = Clock::now();
  const int need = required_samples(0.06, 0.08);
  const double ms = 1e3 * seconds_since(t0);
  const bool ok = need == 448 && 450 >= need && ms < 1.0;
  return {ok, "required_samples(0.06, 0.08) = " + std::to_string(need) + " in " + fmt(ms) + " ms"};
}

// Criterion 2
Outcome oracle_equivalence(const std::vector<Instance>& feasible) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int failures = 0;
  for (const auto& inst : feasible) {
    try {
      const auto sdp = solve_impact({inst.sys});
      const auto freq = impact_oracle_frequency(inst.sys);
      const double rel = std::abs(sdp.value - freq.value) / freq.value;
      if (!(rel <= 1e-2)) ++failures;
      worst = std::max(worst, std::isfinite(rel) ? rel : kUnbounded);
    } catch (const Error&) {
      ++failures;
    }
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < 120.0,
          std::to_string(feasible.size()) + " instances, worst relative error " + fmt(worst) + ", " +
              std::to_string(failures) + " over 1%, " + fmt(secs) + " s"};
}

// Criterion 3
Outcome verdict_agreement(const std::vector<Instance>& feasible, const std::vector<Instance>& infeasible) {
  ImpactOptions o;
  o.structural_precheck = false;
  int agree = 0;
  int total = 0;
  std::map<Verdict, int> kinds;
  for (const auto* set : {&feasible, &infeasible}) {
    for (const auto& inst : *set) {
      ++total;
      ++kinds[inst.verdict];
      try {
        const auto r = solve_impact({inst.sys, 1.0, 1e6}, o);
        if (r.bounded() == (inst.verdict == Verdict::Feasible)) ++agree;
      } catch (const Error&) {
      }
    }
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " agree (" +
                              std::to_string(kinds[Verdict::InfeasibleRelativeDegree]) + " relative-degree, " +
                              std::to_string(kinds[Verdict::InfeasibleUnstableZero]) + " unstable-zero)"};
}

// Criterion 4
Outcome shift_law() {
  std::mt19937_64 rng(4004);
  double worst = 0.0;
  int instances = 0;
  int zeros = 0;
  bool counts_match = true;
  while (instances < 20) {
    const int n = 3 + testing_support::pick(rng, 4);
    const auto net = testing_support::random_network(rng, n, 0.4, 0);
    const int a = 1 + testing_support::pick(rng, n - 1);
    const int m = 1 + testing_support::pick(rng, n - 1);
    const double theta0 = testing_support::uniform(rng, 0.1, 2.0);
    const Matrix l0 = nominal_laplacian(net).matrix;
    const Matrix l1 = nominal_laplacian(net.with_gain_offset(theta0)).matrix;
    const auto z0 = invariant_zeros(SystemRealization::from_laplacian(l0, a, 0, m), Channel::Monitor);
    const auto z1 = invariant_zeros(SystemRealization::from_laplacian(l1, a, 0, m), Channel::Monitor);
    if (z0.finite_zeros.empty()) continue;
    ++instances;
    if (z0.finite_zeros.size() != z1.finite_zeros.size()) {
      counts_match = false;
      continue;
    }
    // Match every shifted zero to its nearest unused counterpart.
    std::vector<bool> used(z1.finite_zeros.size(), false);
    for (auto z : z0.finite_zeros) {
      const std::complex<double> want = z - theta0;
      std::size_t best = 0;
      double dist = kUnbounded;
      for (std::size_t k = 0; k < z1.finite_zeros.size(); ++k) {
        if (!used[k] && std::abs(z1.finite_zeros[k] - want) < dist) {
          dist = std::abs(z1.finite_zeros[k] - want);
          best = k;
        }
      }
      used[best] = true;
      worst = std::max(worst, dist);
      ++zeros;
    }
  }
  return {counts_match && worst <= 1e-8,
          std::to_string(instances) + " instances, " + std::to_string(zeros) + " zeros, max deviation " +
              fmt(worst)};
}

struct FixtureRun {
  RiskPhase risk;
  std::vector<GamePhase> games;
  double seconds = 0.0;
  std::string error;
};

FixtureRun run_fixture() {
  FixtureRun run;
  try {
    const RunConfig cfg = parse_config(fixture_config_text());
    const auto net = build_network(cfg.network);
    PipelineOptions o;
    o.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const auto t0 = Clock::now();
    run.risk = run_risk_phase(cfg, net, o);
    run.seconds = seconds_since(t0);
    for (double beta : run.risk.scenario.risk_levels) run.games.push_back(run_game_phase(run.risk.estimates, beta));
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  return run;
}

// Criterion 5
Outcome antitonicity(const FixtureRun& run) {
  if (!run.error.empty()) return {false, "fixture run failed: " + run.error};
  int finite = 0;
  int violations = 0;
  int failures = 0;
  for (const auto& e : run.risk.estimates) {
    failures += e.failed_samples;
    const double lo = e.var_by_level.at(0.15);
    const double hi = e.var_by_level.at(0.08);
    if (!std::isfinite(hi) || !std::isfinite(lo)) continue;
    ++finite;
    if (lo > hi) ++violations;
  }
  const bool ok = violations == 0 && run.risk.scenario.m1 == 450 && run.seconds <= 1800.0;
  return {ok, std::to_string(run.risk.sdp_pairs) + " pairs x " + std::to_string(run.risk.scenario.m1) +
                  " samples in " + fmt(run.seconds) + " s, " + std::to_string(finite) + " finite pairs, " +
                  std::to_string(violations) + " violations, " + std::to_string(failures) +
                  " solver failures"};
}

double var_of(const FixtureRun& run, int a_label, int m_label, double beta) {
  for (const auto& e : run.risk.estimates) {
    if (e.pair.attack == a_label - 1 && e.pair.monitor == m_label - 1) return e.var_by_level.at(beta);
  }
  return std::nan("");
}

// Criterion 6
Outcome reconstruction(const FixtureRun& run) {
  if (!run.error.empty()) return {false, "fixture run failed: " + run.error};
  const auto monitors = universally_feasible_monitors(run.risk.feasibility);
  const bool monitors_ok = monitors == std::vector<int>{1, 5};
  bool unbounded_ok = true;
  for (double beta : run.risk.scenario.risk_levels) {
    unbounded_ok = unbounded_ok && is_unbounded(var_of(run, 3, 1, beta)) && is_unbounded(var_of(run, 10, 3, beta));
  }
  double lo = kUnbounded;
  double hi = -kUnbounded;
  for (const auto& g : run.games) {
    for (int c : g.payoffs.admissible_columns()) {
      lo = std::min(lo, g.payoffs.entries.col(c).minCoeff());
      hi = std::max(hi, g.payoffs.entries.col(c).maxCoeff());
    }
  }
  const bool range_ok = lo >= 0.146 && hi <= 15.9;
  std::string mon;
  for (int m : monitors) mon += " v" + std::to_string(m + 1);
  return {monitors_ok && unbounded_ok && range_ok,
          "feasible monitors:" + mon + "; (3,1) and (10,3) unbounded: " + (unbounded_ok ? "yes" : "no") +
              "; finite payoffs in [" + fmt(lo, 4) + ", " + fmt(hi, 4) + "], allowed [0.146, 15.9]"};
}

int support(const Vector& mix) { return static_cast<int>((mix.array() > 1e-9).count()); }

double support_enumeration_value(const Matrix& j) {
  const int m = static_cast<int>(j.rows());
  const int n = static_cast<int>(j.cols());
  double found = std::nan("");
  for (int rs = 1; rs < (1 << m); ++rs) {
    for (int cs = 1; cs < (1 << n); ++cs) {
      std::vector<int> rows, cols;
      for (int i = 0; i < m; ++i)
        if (rs >> i & 1) rows.push_back(i);
      for (int k = 0; k < n; ++k)
        if (cs >> k & 1) cols.push_back(k);
      if (rows.size() != cols.size()) continue;
      const int s = static_cast<int>(rows.size());
      Matrix aq = Matrix::Zero(s + 1, s + 1);
      Matrix ap = Matrix::Zero(s + 1, s + 1);
      Vector rhs = Vector::Zero(s + 1);
      rhs[s] = 1.0;
      for (int r = 0; r < s; ++r) {
        for (int c = 0; c < s; ++c) {
          aq(r, c) = j(rows[r], cols[c]);
          ap(r, c) = j(rows[c], cols[r]);
        }
        aq(r, s) = ap(r, s) = -1.0;
        aq(s, r) = ap(s, r) = 1.0;
      }
      Eigen::FullPivLU<Matrix> lq(aq), lp(ap);
      if (!lq.isInvertible() || !lp.isInvertible()) continue;
      const Vector xq = lq.solve(rhs);
      const Vector xp = lp.solve(rhs);
      if ((xq.head(s).array() < -1e-12).any() || (xp.head(s).array() < -1e-12).any()) continue;
      Vector q = Vector::Zero(n), p = Vector::Zero(m);
      for (int c = 0; c < s; ++c) q[cols[c]] = xq[c];
      for (int r = 0; r < s; ++r) p[rows[r]] = xp[r];
      const double v = xq[s];
      if (((j * q).array() > v + 1e-9).any()) continue;
      if (((j.transpose() * p).array() < v - 1e-9).any()) continue;
      found = v;
    }
  }
  return found;
}

// Criterion 7
Outcome duality(const FixtureRun& run) {
  double worst_gap = 0.0;
  double worst_violation = 0.0;
  double worst_brute = 0.0;
  int games = 0;
  auto check = [&](const PayoffMatrix& pm, const GameSolution& sol) {
    ++games;
    worst_gap = std::max(worst_gap, std::abs(sol.detector_lp_value - sol.attacker_lp_value));
    worst_violation = std::max(worst_violation, equilibrium_violation(pm, sol));
  };
  for (const auto& g : run.games) check(g.payoffs, g.solution);

  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    PayoffMatrix pm;
    pm.attack_actions = {0, 1, 2, 3};
    pm.monitor_actions = {0, 1, 2, 3};
    pm.entries.resize(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) pm.entries(r, c) = u(rng);
    try {
      const auto sol = solve_mixed_nash(pm);
      check(pm, sol);
      const double brute = support_enumeration_value(pm.entries);
      worst_brute = std::max(worst_brute, std::isnan(brute) ? kUnbounded : std::abs(sol.value - brute));
    } catch (const Error&) {
      worst_brute = kUnbounded;
    }
  }
  const bool ok = run.error.empty() && worst_gap <= 1e-8 && worst_violation <= 1e-8 && worst_brute <= 1e-6;
  return {ok, std::to_string(games) + " games (" + std::to_string(run.games.size()) +
                  " fixture), LP gap " + fmt(worst_gap) + ", no-deviation violation " + fmt(worst_violation) +
                  ", brute-force deviation " + fmt(worst_brute)};
}

// Criterion 8
Outcome saddle_coherence(const FixtureRun& run) {
  if (run.games.empty()) return {false, "no fixture games: " + run.error};
  bool coherent = true;
  std::string detail;
  std::vector<bool> pure;
  for (const auto& g : run.games) {
    const auto saddle = find_pure_saddle(g.payoffs);
    const auto& sol = g.solution;
    const bool lp_pure = support(sol.attacker_mix) == 1 && support(sol.detector_mix) == 1;
    coherent = coherent && saddle.has_value() == lp_pure;
    pure.push_back(saddle.has_value());
    detail += "beta=" + format_number(g.beta) + ": ";
    if (saddle) {
      detail += "saddle (a" + std::to_string(saddle->first + 1) + ", m" + std::to_string(saddle->second + 1) + ")";
    } else {
      detail += "mixed, supports " + std::to_string(support(sol.attacker_mix)) + "x" +
                std::to_string(support(sol.detector_mix));
    }
    detail += ", value " + fmt(sol.value, 5) + "; ";
  }
  const bool reference_regime = pure.size() == 2 && pure[0] && !pure[1] &&
                                support(run.games[1].solution.attacker_mix) >= 2 &&
                                support(run.games[1].solution.detector_mix) >= 2;
  detail += reference_regime ? "regime matches the reference (pure, then mixed)"
                             : "regime differs from the reference (pure at 0.08, mixed at 0.15)";
  return {coherent, detail};
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return fa && fb && sa.str() == sb.str();
}

std::vector<fs::path> bundle_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".csv" || ext == ".json")) out.push_back(fs::relative(entry.path(), dir));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Criterion 9
Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no --cli given; cannot run the reproduce command"};
  const fs::path root = fs::temp_directory_path() / "stealthrisk_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  for (const char* run : {"first", "second"}) {
    const std::string cmd = "\"" + cli + "\" reproduce -q --out \"" + (root / run).string() + "\" > \"" +
                            (root / (std::string(run) + ".log")).string() + "\" 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, std::string("reproduce exited nonzero on the ") + run + " run"};
  }
  const auto first = bundle_files(root / "first");
  const auto second = bundle_files(root / "second");
  if (first != second || first.empty()) return {false, "the two bundles contain different file sets"};
  int differing = 0;
  for (const auto& f : first) differing += !same_bytes(root / "first" / f, root / "second" / f);
  fs::remove_all(root);
  return {differing == 0, std::to_string(first.size()) + " CSV/JSON files compared, " + std::to_string(differing) +
                              " differ"};
}

// Criterion 10
Outcome threshold_scaling(const std::vector<Instance>& feasible) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 10 && i < feasible.size(); ++i) {
    try {
      const auto one = solve_impact({feasible[i].sys, 1.0});
      const auto two = solve_impact({feasible[i].sys, 2.0});
      worst = std::max(worst, std::abs(two.value - 2.0 * one.value) / (2.0 * one.value));
    } catch (const Error&) {
      worst = kUnbounded;
    }
  }
  return {worst <= 1e-6, "10 instances, worst relative deviation " + fmt(worst)};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  int only = 0;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") {
      cli = argv[i + 1];
    } else if (flag == "--only") {
      only = std::atoi(argv[i + 1]);
    } else {
      std::cerr << "usage: acceptance [--cli <path>] [--only <criterion>]\n";
      return 64;
    }
  }

  const auto feasible = random_instances(2002, 50, true);
  const auto infeasible = random_instances(3003, 20, false);
  std::optional<FixtureRun> fixture;
  auto fixture_run = [&]() -> const FixtureRun& {
    if (!fixture) fixture = run_fixture();
    return *fixture;
  };

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"sample-size certificate", sample_certificate},
      {"SDP matches frequency oracle", [&] { return oracle_equivalence(feasible); }},
      {"verdict agrees with SDP boundedness", [&] { return verdict_agreement(feasible, infeasible); }},
      {"zero shift law", shift_law},
      {"VaR antitonicity on the fixture", [&] { return antitonicity(fixture_run()); }},
      {"reconstruction-level reproduction", [&] { return reconstruction(fixture_run()); }},
      {"game solver duality", [&] { return duality(fixture_run()); }},
      {"saddle coherence on the fixture", [&] { return saddle_coherence(fixture_run()); }},
      {"reproduce is deterministic", [&] { return determinism(cli); }},
      {"impact scales with the alarm threshold", [&] { return threshold_scaling(feasible); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (only != 0 && only != number) continue;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    failed += !out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << number << " (" << criteria[i].first
              << "): " << out.detail << std::endl;
  }
  return failed;
}
