#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stealthrisk/game.hpp"
#include "stealthrisk/risk.hpp"
#include "stealthrisk/sysid.hpp"

namespace stealthrisk {

// Shortest round-trip decimal; "Unbounded" for +inf, "NotEvaluated" for NaN.
std::string format_number(double v);

std::string sha256_hex(const std::string& data);

struct FeasibilityRow {
  VertexPair pair;
  int r_target = 0;
  int r_monitor = 0;
  Verdict verdict = Verdict::Feasible;
};

std::string feasibility_csv(const std::vector<FeasibilityRow>& rows);

// Columns: pair, sample_index, gamma_star.
std::string samples_csv(const RiskEstimate& estimate);

std::string var_json(const std::vector<RiskEstimate>& estimates, const ScenarioConfig& cfg);
// Reads the per-pair VaR tables back; sample vectors are not restored.
std::vector<RiskEstimate> load_var_json(const std::string& text, std::vector<double>* levels = nullptr);

std::string game_json(const PayoffMatrix& pm, const GameSolution& sol, double beta);

struct RunManifest {
  std::string config_digest;
  std::uint64_t seed = 0;
  int m1 = 0;
  double epsilon1 = 0.0;
  double beta1 = 0.0;
  std::vector<double> risk_levels;
  std::string tool_version;
  std::vector<std::pair<std::string, double>> timing;  // seconds per phase
};

// Timing is left out so that the manifest is a pure function of the inputs;
// see timing_text().
std::string manifest_json(const RunManifest& manifest);
std::string timing_text(const RunManifest& manifest);

}  // namespace stealthrisk
