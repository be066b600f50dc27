#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "stealthrisk/pipeline.hpp"

namespace fs = std::filesystem;
using namespace stealthrisk;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kSolverFailure = 3,
  kNoSecurePlacement = 4,
  kInsufficientSamples = 5,
  kIoError = 6,
};

int default_threads() {
  if (const char* env = std::getenv("STEALTHRISK_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid STEALTHRISK_THREADS='" << env << "'\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct CommonFlags {
  std::string config;
  std::string out;
  int threads = default_threads();
  bool force = false;
  bool all_pairs = false;
  std::vector<std::string> pairs;
  std::vector<double> levels;
  std::int64_t seed = -1;
  int samples = -1;
  bool quiet = false;
};

RunConfig load(const CommonFlags& f) {
  return f.config.empty() ? parse_config(fixture_config_text()) : load_config(f.config);
}

PipelineOptions pipeline_options(const CommonFlags& f, const UncertainNetwork& net) {
  PipelineOptions o;
  o.threads = f.threads;
  o.force = f.force;
  o.all_pairs = f.all_pairs;
  if (!f.pairs.empty()) {
    std::vector<VertexPair> pairs;
    for (const auto& p : f.pairs) pairs.push_back(parse_pair(p, net.n_vertices()));
    o.pairs = pairs;
  }
  if (!f.levels.empty()) o.levels = f.levels;
  if (f.seed >= 0) o.seed = static_cast<std::uint64_t>(f.seed);
  if (f.samples >= 0) o.samples = f.samples;
  o.log = f.quiet ? nullptr : &std::cerr;
  return o;
}

RunManifest make_manifest(const RunConfig& cfg, const ScenarioConfig& sc) {
  RunManifest m;
  m.config_digest = sha256_hex(cfg.source_text);
  m.seed = sc.master_seed;
  m.m1 = sc.m1;
  m.epsilon1 = sc.epsilon1;
  m.beta1 = sc.beta1;
  m.risk_levels = sc.risk_levels;
  m.tool_version = std::string(tool_version());
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_feasibility(const CommonFlags& f) {
  const RunConfig cfg = load(f);
  const auto net = build_network(cfg.network);
  const auto rows = feasibility_table(net);
  const std::string csv = feasibility_csv(rows);
  if (f.out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(f.out, csv);
  }
  std::cerr << "monitors feasible against every attack:";
  for (int m : universally_feasible_monitors(rows)) std::cerr << " v" << m + 1;
  std::cerr << "\n";
  return kOk;
}

int cmd_risk(const CommonFlags& f) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = load(f);
  const auto net = build_network(cfg.network);
  const auto opts = pipeline_options(f, net);
  const RiskPhase risk = run_risk_phase(cfg, net, opts);
  RunManifest manifest = make_manifest(cfg, risk.scenario);
  manifest.timing = {{"risk", risk.seconds}, {"total", seconds_since(t0)}};
  const fs::path dir = f.out.empty() ? fs::path("risk_out") : fs::path(f.out);
  write_risk_bundle(dir, cfg, risk, manifest);

  int failures = 0;
  for (const auto& e : risk.estimates) failures += e.failed_samples;
  std::cout << "wrote " << dir.string() << " (" << risk.sdp_pairs << " pairs solved, "
            << failures << " solver failures)\n";
  return failures > 0 ? kSolverFailure : kOk;
}

int report_games(const std::vector<RiskEstimate>& estimates, const std::vector<double>& levels,
                 const fs::path& dir, std::vector<GamePhase>* games = nullptr) {
  for (double beta : levels) {
    GamePhase g = run_game_phase(estimates, beta);
    write_game_bundle(dir, g);
    std::cout << game_report(g) << "\n";
    if (games) games->push_back(std::move(g));
  }
  return kOk;
}

int cmd_game(const CommonFlags& f, const std::string& risk_dir) {
  std::vector<RiskEstimate> estimates;
  std::vector<double> levels;
  fs::path dir;
  if (!risk_dir.empty()) {
    std::ifstream in(fs::path(risk_dir) / "var.json", std::ios::binary);
    if (!in) throw ConfigError("cannot read " + (fs::path(risk_dir) / "var.json").string());
    std::ostringstream buf;
    buf << in.rdbuf();
    estimates = load_var_json(buf.str(), &levels);
    dir = f.out.empty() ? fs::path(risk_dir) : fs::path(f.out);
  } else {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = load(f);
    const auto net = build_network(cfg.network);
    const RiskPhase risk = run_risk_phase(cfg, net, pipeline_options(f, net));
    RunManifest manifest = make_manifest(cfg, risk.scenario);
    manifest.timing = {{"risk", risk.seconds}, {"total", seconds_since(t0)}};
    dir = f.out.empty() ? fs::path("game_out") : fs::path(f.out);
    write_risk_bundle(dir, cfg, risk, manifest);
    estimates = risk.estimates;
    levels = risk.scenario.risk_levels;
  }
  if (!f.levels.empty()) levels = f.levels;
  return report_games(estimates, levels, dir);
}

template <typename Fn>
auto phase(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception&) {
    std::cerr << "reproduce: phase '" << name << "' failed\n";
    throw;
  }
}

int cmd_reproduce(const CommonFlags& f) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = phase("config", [&] { return load(f); });
  const auto net = phase("network", [&] { return build_network(cfg.network); });
  const RiskPhase risk =
      phase("risk", [&] { return run_risk_phase(cfg, net, pipeline_options(f, net)); });
  const fs::path dir = f.out.empty() ? fs::path("reproduce_out") : fs::path(f.out);

  const auto tg = std::chrono::steady_clock::now();
  std::vector<GamePhase> games = phase("game", [&] {
    std::vector<GamePhase> out;
    for (double beta : risk.scenario.risk_levels) {
      GamePhase g = run_game_phase(risk.estimates, beta);
      write_game_bundle(dir, g);
      out.push_back(std::move(g));
    }
    return out;
  });
  const double game_seconds = seconds_since(tg);

  const std::string sheet = comparison_sheet(risk, games);
  write_text_file(dir / "report.txt", sheet);
  RunManifest manifest = make_manifest(cfg, risk.scenario);
  manifest.timing = {{"risk", risk.seconds}, {"game", game_seconds}, {"total", seconds_since(t0)}};
  write_risk_bundle(dir, cfg, risk, manifest);

  for (const auto& g : games) std::cout << game_report(g) << "\n";
  std::cout << sheet;
  std::cout << "\nbundle written to " << dir.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-based sensor placement against stealthy data-injection attacks"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  CommonFlags flags;
  std::string risk_dir;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", flags.config, "JSON run configuration (default: built-in 10-vertex fixture)")
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--out", flags.out, "Output file or directory");
  };
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--threads", flags.threads, "Worker threads (default: $STEALTHRISK_THREADS or logical cores)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--force", flags.force, "Run even if the sample count is below the certificate");
    sub->add_flag("--all-pairs", flags.all_pairs, "Also solve pairs in structurally gated monitor columns");
    sub->add_option("--pairs", flags.pairs, "Restrict to pairs, e.g. --pairs a=10,m=6 (repeatable)");
    sub->add_option("--levels", flags.levels, "Risk levels beta (overrides config)")->delimiter(',');
    sub->add_option("--seed", flags.seed, "Master seed (overrides config)")->check(CLI::NonNegativeNumber);
    sub->add_option("--samples", flags.samples, "Sample count M1 (overrides config)")->check(CLI::PositiveNumber);
    sub->add_flag("-q,--quiet", flags.quiet, "No progress output");
  };

  auto* feas = app.add_subcommand("feasibility", "Tabulate verdicts for every (attack, monitor) pair");
  add_config(feas);
  auto* risk = app.add_subcommand("risk", "Sample impacts and write per-pair VaR tables");
  add_config(risk);
  add_run_flags(risk);
  auto* game = app.add_subcommand("game", "Solve the detector-vs-attacker game");
  add_config(game);
  add_run_flags(game);
  game->add_option("--risk-dir", risk_dir, "Reuse the var.json of an earlier risk run")
      ->check(CLI::ExistingDirectory);
  game->add_option("--level", flags.levels, "Risk level(s) to solve at")->delimiter(',');
  auto* repro = app.add_subcommand("reproduce", "Run the whole pipeline on the 10-vertex fixture");
  add_config(repro);
  add_run_flags(repro);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*feas) return cmd_feasibility(flags);
    if (*risk) return cmd_risk(flags);
    if (*game) return cmd_game(flags, risk_dir);
    if (*repro) return cmd_reproduce(flags);
  } catch (const InsufficientSamples& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInsufficientSamples;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NoSecurePlacement& e) {
    std::cerr << "no secure placement: " << e.what() << "\n";
    return kNoSecurePlacement;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
