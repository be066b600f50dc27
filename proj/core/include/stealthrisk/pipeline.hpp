#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stealthrisk/config.hpp"
#include "stealthrisk/game.hpp"
#include "stealthrisk/io.hpp"
#include "stealthrisk/risk.hpp"

namespace stealthrisk {

std::string_view tool_version();

// (N-1)^2 verdicts on the nominal realization, attack-major order.
std::vector<FeasibilityRow> feasibility_table(const UncertainNetwork& net);

// Monitors whose verdict is Feasible against every attack vertex.
std::vector<int> universally_feasible_monitors(const std::vector<FeasibilityRow>& rows);

struct PairSelection {
  std::vector<VertexPair> evaluate;
  std::vector<VertexPair> skipped;  // structurally feasible, but in a gated column
};

// Every pair except the structurally feasible ones whose monitor column is
// already lost to a relative-degree violation; those need no SDP because the
// detector will never play that column. With `all_pairs` nothing is skipped.
PairSelection select_pairs(const std::vector<FeasibilityRow>& rows, bool all_pairs);

// Parses "a=10,m=6" (1-based) into a pair.
VertexPair parse_pair(const std::string& text, int n_vertices);

struct PipelineOptions {
  int threads = 1;
  bool force = false;
  bool all_pairs = false;
  std::optional<std::vector<VertexPair>> pairs;
  std::optional<std::vector<double>> levels;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::ostream* log = nullptr;
};

// Resolves command-line overrides against the config and validates the
// scenario. Throws InsufficientSamples when the sample count is below the
// certificate and `force` is not set.
ScenarioConfig effective_scenario(const RunConfig& cfg, const PipelineOptions& options);

class InsufficientSamples : public ConfigError {
 public:
  InsufficientSamples(int requested, int required);
  int requested;
  int required;
};

struct RiskPhase {
  ScenarioConfig scenario;
  std::vector<FeasibilityRow> feasibility;
  std::vector<RiskEstimate> estimates;
  int sdp_pairs = 0;
  double seconds = 0.0;
};

RiskPhase run_risk_phase(const RunConfig& cfg, const UncertainNetwork& net,
                         const PipelineOptions& options);

struct GamePhase {
  double beta = 0.0;
  PayoffMatrix payoffs;
  GameSolution solution;
};

GamePhase run_game_phase(const std::vector<RiskEstimate>& estimates, double beta);

std::string game_report(const GamePhase& game);

// Side-by-side of this run against the reference numbers for the
// 10-vertex example, with the tolerance each comparison is held to.
std::string comparison_sheet(const RiskPhase& risk, const std::vector<GamePhase>& games);

void write_text_file(const std::filesystem::path& path, const std::string& text);

void write_risk_bundle(const std::filesystem::path& dir, const RunConfig& cfg, const RiskPhase& risk,
                       const RunManifest& manifest);

void write_game_bundle(const std::filesystem::path& dir, const GamePhase& game);

std::string level_tag(double beta);

}  // namespace stealthrisk
