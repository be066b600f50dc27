#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stealthrisk/common.hpp"
#include "stealthrisk/risk.hpp"

namespace stealthrisk {

// Rows are attack vertices, columns monitor vertices (0-based labels).
// Entries are finite, +inf (Unbounded) or NaN (not evaluated; only allowed
// in columns that also contain +inf).
struct PayoffMatrix {
  std::vector<int> attack_actions;
  std::vector<int> monitor_actions;
  Matrix entries;

  int rows() const { return static_cast<int>(entries.rows()); }
  int cols() const { return static_cast<int>(entries.cols()); }
  // Columns whose entries are all finite.
  std::vector<int> admissible_columns() const;
};

PayoffMatrix assemble_payoffs(const std::vector<RiskEstimate>& estimates, double beta);

struct GameSolution {
  double value = 0.0;
  Vector attacker_mix;  // over attack_actions
  Vector detector_mix;  // over monitor_actions, zero on pruned columns
  std::optional<std::pair<int, int>> pure_saddle;  // (attack, monitor) labels
  std::vector<int> pruned_monitors;
  double detector_lp_value = 0.0;
  double attacker_lp_value = 0.0;
  bool non_unique = false;
};

// First (attack, monitor) in lexicographic label order that is the maximum
// of its column and the minimum of its row, over admissible columns. Throws
// NoSecurePlacement when no column is admissible.
std::optional<std::pair<int, int>> find_pure_saddle(const PayoffMatrix& pm);

// Both LPs of the zero-sum game: the detector minimizes its worst-case
// expected payoff, the attacker maximizes its guaranteed one.
GameSolution solve_mixed_nash(const PayoffMatrix& pm);

double expected_payoff(const PayoffMatrix& pm, const Vector& attacker_mix,
                       const Vector& detector_mix);

// Largest violation of the no-deviation inequalities for the given mixes.
double equilibrium_violation(const PayoffMatrix& pm, const GameSolution& sol);

// Aligned text table with 1-based labels.
std::string format_payoff_table(const PayoffMatrix& pm, int precision = 4);

}  // namespace stealthrisk
