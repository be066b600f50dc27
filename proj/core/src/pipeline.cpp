#include "stealthrisk/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

#include "stealthrisk/version.hpp"

namespace stealthrisk {

std::string_view tool_version() { return kVersionString; }

std::vector<FeasibilityRow> feasibility_table(const UncertainNetwork& net) {
  const Matrix l = nominal_laplacian(net).matrix;
  std::vector<FeasibilityRow> rows;
  for (int a = 0; a < net.n_vertices(); ++a) {
    if (a == net.target()) continue;
    for (int m = 0; m < net.n_vertices(); ++m) {
      if (m == net.target()) continue;
      const auto sys = SystemRealization::from_laplacian(l, a, net.target(), m);
      FeasibilityRow row;
      row.pair = {a, m};
      row.r_target = relative_degree(sys, Channel::Target);
      row.r_monitor = relative_degree(sys, Channel::Monitor);
      row.verdict = feasibility_verdict(sys);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<int> universally_feasible_monitors(const std::vector<FeasibilityRow>& rows) {
  std::map<int, bool> ok;
  for (const auto& r : rows) {
    auto [it, inserted] = ok.emplace(r.pair.monitor, true);
    it->second = it->second && r.verdict == Verdict::Feasible;
  }
  std::vector<int> out;
  for (const auto& [m, feasible] : ok) {
    if (feasible) out.push_back(m);
  }
  return out;
}

PairSelection select_pairs(const std::vector<FeasibilityRow>& rows, bool all_pairs) {
  std::set<int> gated;
  for (const auto& r : rows) {
    if (r.verdict == Verdict::InfeasibleRelativeDegree) gated.insert(r.pair.monitor);
  }
  PairSelection sel;
  for (const auto& r : rows) {
    const bool skip = !all_pairs && gated.count(r.pair.monitor) &&
                      r.verdict != Verdict::InfeasibleRelativeDegree;
    (skip ? sel.skipped : sel.evaluate).push_back(r.pair);
  }
  return sel;
}

VertexPair parse_pair(const std::string& text, int n_vertices) {
  static const std::regex pattern(R"(\s*a\s*=\s*(\d+)\s*,\s*m\s*=\s*(\d+)\s*)");
  std::smatch match;
  if (!std::regex_match(text, match, pattern)) {
    throw ConfigError("pair '" + text + "' is not of the form a=<vertex>,m=<vertex>");
  }
  const int a = std::stoi(match[1]);
  const int m = std::stoi(match[2]);
  if (a < 1 || a > n_vertices || m < 1 || m > n_vertices) {
    throw ConfigError("pair '" + text + "' references a vertex outside 1.." +
                      std::to_string(n_vertices));
  }
  return {a - 1, m - 1};
}

InsufficientSamples::InsufficientSamples(int requested_, int required_)
    : ConfigError("sample count " + std::to_string(requested_) + " is below the required " +
                  std::to_string(required_) + " (use --force to override)"),
      requested(requested_),
      required(required_) {}

ScenarioConfig effective_scenario(const RunConfig& cfg, const PipelineOptions& options) {
  ScenarioConfig sc = cfg.scenario;
  if (options.levels) sc.risk_levels = *options.levels;
  if (options.seed) sc.master_seed = *options.seed;
  if (options.samples) sc.m1 = *options.samples;
  sc.validate(false);
  const int need = required_samples(sc.epsilon1, sc.beta1);
  if (sc.m1 < need && !options.force) throw InsufficientSamples(sc.m1, need);
  return sc;
}

RiskPhase run_risk_phase(const RunConfig& cfg, const UncertainNetwork& net,
                         const PipelineOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RiskPhase phase;
  phase.scenario = effective_scenario(cfg, options);
  phase.feasibility = feasibility_table(net);

  PairSelection sel;
  if (options.pairs) {
    sel.evaluate = *options.pairs;
    std::sort(sel.evaluate.begin(), sel.evaluate.end());
    sel.evaluate.erase(std::unique(sel.evaluate.begin(), sel.evaluate.end()), sel.evaluate.end());
  } else {
    sel = select_pairs(phase.feasibility, options.all_pairs);
  }

  RiskOptions ro;
  ro.alarm_threshold = cfg.alarm_threshold;
  ro.gamma_cap = cfg.gamma_cap;
  ro.impact.method = cfg.method;
  ro.threads = options.threads;
  ro.continue_on_failure = true;

  int last_reported = -1;
  auto progress = [&](int done, int total) {
    if (!options.log) return;
    const int pct = 100 * done / total;
    if (pct / 10 != last_reported / 10 || done == total) {
      last_reported = pct;
      *options.log << "  risk: " << done << "/" << total << " samples\n" << std::flush;
    }
  };
  if (options.log) {
    *options.log << "risk phase: " << sel.evaluate.size() << " pairs x " << phase.scenario.m1
                 << " samples on " << options.threads << " thread(s)\n";
  }
  phase.estimates = estimate_risks(net, sel.evaluate, phase.scenario, ro, nullptr, progress);
  for (const auto& p : sel.skipped) phase.estimates.push_back(skipped_estimate(p, phase.scenario));
  std::sort(phase.estimates.begin(), phase.estimates.end(),
            [](const RiskEstimate& x, const RiskEstimate& y) { return x.pair < y.pair; });

  for (const auto& e : phase.estimates) {
    const bool solved = std::any_of(e.causes.begin(), e.causes.end(), [](UnboundedCause c) {
      return c != UnboundedCause::RelativeDegree && c != UnboundedCause::UnstableZero;
    });
    if (e.evaluated && solved) ++phase.sdp_pairs;
  }
  phase.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return phase;
}

GamePhase run_game_phase(const std::vector<RiskEstimate>& estimates, double beta) {
  GamePhase g;
  g.beta = beta;
  g.payoffs = assemble_payoffs(estimates, beta);
  g.solution = solve_mixed_nash(g.payoffs);
  return g;
}

std::string level_tag(double beta) { return "b" + format_number(beta); }

namespace {

std::string percent(double p) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * p << "%";
  return os.str();
}

std::string fixed4(double v) {
  if (is_unbounded(v)) return "inf";
  if (std::isnan(v)) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

std::string mix_text(const Vector& mix, const std::vector<int>& labels) {
  std::ostringstream os;
  bool first = true;
  for (Eigen::Index i = 0; i < mix.size(); ++i) {
    if (mix[i] <= 1e-12) continue;
    os << (first ? "" : ", ") << "v" << labels[static_cast<std::size_t>(i)] + 1 << " " << percent(mix[i]);
    first = false;
  }
  return os.str();
}

int support_size(const Vector& mix) {
  return static_cast<int>((mix.array() > 1e-9).count());
}

const GamePhase* find_level(const std::vector<GamePhase>& games, double beta) {
  for (const auto& g : games) {
    if (std::abs(g.beta - beta) <= 1e-12) return &g;
  }
  return nullptr;
}

double entry(const GamePhase& g, int attack_label, int monitor_label) {
  const auto& pm = g.payoffs;
  auto ai = std::find(pm.attack_actions.begin(), pm.attack_actions.end(), attack_label - 1);
  auto mi = std::find(pm.monitor_actions.begin(), pm.monitor_actions.end(), monitor_label - 1);
  if (ai == pm.attack_actions.end() || mi == pm.monitor_actions.end()) return std::nan("");
  return pm.entries(ai - pm.attack_actions.begin(), mi - pm.monitor_actions.begin());
}

double column_max(const GamePhase& g, int monitor_label) {
  const auto& pm = g.payoffs;
  auto mi = std::find(pm.monitor_actions.begin(), pm.monitor_actions.end(), monitor_label - 1);
  if (mi == pm.monitor_actions.end()) return std::nan("");
  return pm.entries.col(mi - pm.monitor_actions.begin()).maxCoeff();
}

std::string within_decade(double ours, double ref) {
  if (!std::isfinite(ours) || ours <= 0.0) return "MISMATCH";
  return std::abs(std::log10(ours / ref)) <= 1.0 ? "ok" : "MISMATCH";
}

}  // namespace

std::string game_report(const GamePhase& game) {
  const auto& pm = game.payoffs;
  const auto& sol = game.solution;
  std::ostringstream os;
  os << "risk level beta = " << format_number(game.beta) << "\n\n";
  os << format_payoff_table(pm);
  os << "\npruned monitors:";
  if (sol.pruned_monitors.empty()) os << " none";
  for (int m : sol.pruned_monitors) os << " v" << m + 1;
  os << "\npure saddle: ";
  if (sol.pure_saddle) {
    os << "(a=" << sol.pure_saddle->first + 1 << ", m=" << sol.pure_saddle->second + 1 << ")";
  } else {
    os << "none";
  }
  os << "\ngame value: " << std::setprecision(10) << sol.value;
  os << "\ndetector mix: " << mix_text(sol.detector_mix, pm.monitor_actions);
  os << "\nattacker mix: " << mix_text(sol.attacker_mix, pm.attack_actions);
  if (sol.non_unique) os << "\nnote: the LP optimum is degenerate; other equilibrium mixes may exist";
  os << "\n";
  return os.str();
}

std::string comparison_sheet(const RiskPhase& risk, const std::vector<GamePhase>& games) {
  std::ostringstream os;
  os << "Comparison with the reference 10-vertex example\n";
  os << "(the shipped topology is a reconstruction; payoff magnitudes are compared to within one "
        "decade, structure exactly)\n\n";
  auto line = [&](const std::string& item, const std::string& reference, const std::string& ours,
                  const std::string& tolerance, const std::string& status) {
    os << std::left << std::setw(34) << item << std::setw(22) << reference << std::setw(26) << ours
       << std::setw(14) << tolerance << status << "\n";
  };
  line("item", "reference", "this run", "tolerance", "status");
  line("----", "---------", "--------", "---------", "------");

  const auto& sc = risk.scenario;
  const int need = required_samples(sc.epsilon1, sc.beta1);
  line("required samples (eps1, beta1)", "M1 = 450 accepted", std::to_string(need) + " <= " + std::to_string(sc.m1),
       "exact", sc.m1 >= need ? "ok" : "MISMATCH");

  const auto feasible = universally_feasible_monitors(risk.feasibility);
  std::string fm;
  for (int m : feasible) fm += (fm.empty() ? "v" : ", v") + std::to_string(m + 1);
  line("universally feasible monitors", "v2, v6", fm.empty() ? "none" : fm, "exact",
       feasible == std::vector<int>{1, 5} ? "ok" : "MISMATCH");

  auto unbounded_pair = [&](int a, int m) {
    for (const auto& e : risk.estimates) {
      if (e.pair.attack == a - 1 && e.pair.monitor == m - 1) {
        bool all = e.evaluated;
        for (const auto& [beta, v] : e.var_by_level) all = all && is_unbounded(v);
        return std::string(all ? "Unbounded" : "finite");
      }
    }
    return std::string("not computed");
  };
  for (auto [a, m] : {std::pair{3, 1}, std::pair{10, 3}}) {
    const auto ours = unbounded_pair(a, m);
    line("J(a=" + std::to_string(a) + ", m=" + std::to_string(m) + ") all levels", "Unbounded", ours,
         "exact", ours == "Unbounded" ? "ok" : "MISMATCH");
  }

  const GamePhase* ga = find_level(games, 0.08);
  const GamePhase* gb = find_level(games, 0.15);
  if (ga) {
    line("max_a J(a, m=2; 0.08)", "1.5848", fixed4(column_max(*ga, 2)), "one decade",
         within_decade(column_max(*ga, 2), 1.5848));
    line("max_a J(a, m=6; 0.08)", "1.5055", fixed4(column_max(*ga, 6)), "one decade",
         within_decade(column_max(*ga, 6), 1.5055));
  }
  if (gb) {
    line("max_a J(a, m=2; 0.15)", "1.5550", fixed4(column_max(*gb, 2)), "one decade",
         within_decade(column_max(*gb, 2), 1.5550));
    line("max_a J(a, m=6; 0.15)", "1.4803", fixed4(column_max(*gb, 6)), "one decade",
         within_decade(column_max(*gb, 6), 1.4803));
    const std::tuple<int, int, double> refs[] = {
        {1, 2, 1.4603}, {10, 6, 1.4803}, {1, 6, 1.4856}, {10, 2, 1.5550}};
    for (const auto& [a, m, ref] : refs) {
      const double v = entry(*gb, a, m);
      std::ostringstream r;
      r << std::fixed << std::setprecision(4) << ref;
      line("J(a=" + std::to_string(a) + ", m=" + std::to_string(m) + "; 0.15)", r.str(), fixed4(v),
           "one decade", within_decade(v, ref));
    }
  }
  auto saddle_text = [](const GamePhase& g) {
    if (!g.solution.pure_saddle) return std::string("none");
    return "(" + std::to_string(g.solution.pure_saddle->first + 1) + ", " +
           std::to_string(g.solution.pure_saddle->second + 1) + ")";
  };
  if (ga) {
    const auto s = saddle_text(*ga);
    line("pure saddle at 0.08", "(10, 6)", s, "regime", s == "(10, 6)" ? "ok" : "DIFFERENT REGIME");
  }
  if (gb) {
    const auto s = saddle_text(*gb);
    line("pure saddle at 0.15", "none", s, "regime", s == "none" ? "ok" : "DIFFERENT REGIME");
    const auto& sol = gb->solution;
    const std::string supports = std::to_string(support_size(sol.attacker_mix)) + "x" +
                                 std::to_string(support_size(sol.detector_mix));
    line("mixed supports at 0.15", "2x2 ({1,10}x{2,6})", supports, "regime",
         supports == "2x2" ? "ok" : "DIFFERENT REGIME");
    line("detector mix at 0.15", "v6 94.72%, v2 5.28%", mix_text(sol.detector_mix, gb->payoffs.monitor_actions),
         "reported", "-");
    line("attacker mix at 0.15", "v1 74.71%, v10 25.29%", mix_text(sol.attacker_mix, gb->payoffs.attack_actions),
         "reported", "-");
  }
  for (const auto& g : games) {
    os << "\nlevel " << format_number(g.beta) << ": detector/attacker LP values "
       << std::setprecision(12) << g.solution.detector_lp_value << " / "
       << g.solution.attacker_lp_value << ", no-deviation slack "
       << std::setprecision(3) << equilibrium_violation(g.payoffs, g.solution);
  }
  os << "\n";
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void write_risk_bundle(const std::filesystem::path& dir, const RunConfig& cfg, const RiskPhase& risk,
                       const RunManifest& manifest) {
  write_text_file(dir / "config.json", cfg.source_text);
  write_text_file(dir / "manifest.json", manifest_json(manifest));
  write_text_file(dir / "timing.txt", timing_text(manifest));
  write_text_file(dir / "feasibility.csv", feasibility_csv(risk.feasibility));
  for (const auto& e : risk.estimates) {
    if (!e.evaluated) continue;
    write_text_file(dir / "samples" / (e.pair.label() + ".csv"), samples_csv(e));
  }
  write_text_file(dir / "var.json", var_json(risk.estimates, risk.scenario));
}

void write_game_bundle(const std::filesystem::path& dir, const GamePhase& game) {
  const std::string tag = level_tag(game.beta);
  write_text_file(dir / ("game_" + tag + ".json"), game_json(game.payoffs, game.solution, game.beta));
  write_text_file(dir / ("game_" + tag + ".txt"), game_report(game));
}

}  // namespace stealthrisk
