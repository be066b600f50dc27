#include "stealthrisk/game.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

#include "stealthrisk/simplex.hpp"

namespace stealthrisk {

namespace {

struct MinMax {
  Vector mix;
  double value = 0.0;
  bool alternative_optima = false;
};

// min over column mixes q of max_i (K q)_i.
MinMax min_max_mix(const Matrix& k) {
  const double shift = 1.0 - k.minCoeff();
  const Matrix shifted = k.array() + shift;
  const auto lp = maximize_canonical(shifted, Vector::Ones(k.rows()), Vector::Ones(k.cols()));
  MinMax out;
  const double total = lp.x.sum();
  out.mix = lp.x / total;
  out.value = 1.0 / total - shift;
  out.alternative_optima = lp.alternative_optima;
  return out;
}

double tie_tolerance(const Matrix& j) {
  return 1e-12 * std::max(1.0, j.cwiseAbs().maxCoeff());
}

}  // namespace

std::vector<int> PayoffMatrix::admissible_columns() const {
  std::vector<int> cols;
  for (int j = 0; j < this->cols(); ++j) {
    if (entries.col(j).allFinite()) cols.push_back(j);
  }
  return cols;
}

PayoffMatrix assemble_payoffs(const std::vector<RiskEstimate>& estimates, double beta) {
  if (estimates.empty()) throw Error("assemble_payoffs: no estimates");
  std::map<VertexPair, const RiskEstimate*> by_pair;
  std::vector<int> attacks, monitors;
  for (const auto& e : estimates) {
    if (!by_pair.emplace(e.pair, &e).second) {
      throw Error("assemble_payoffs: duplicate estimate for " + e.pair.label());
    }
    attacks.push_back(e.pair.attack);
    monitors.push_back(e.pair.monitor);
  }
  auto unique_sorted = [](std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  unique_sorted(attacks);
  unique_sorted(monitors);

  PayoffMatrix pm;
  pm.attack_actions = attacks;
  pm.monitor_actions = monitors;
  pm.entries.resize(static_cast<Eigen::Index>(attacks.size()),
                    static_cast<Eigen::Index>(monitors.size()));
  for (std::size_t i = 0; i < attacks.size(); ++i) {
    for (std::size_t j = 0; j < monitors.size(); ++j) {
      const VertexPair pair{attacks[i], monitors[j]};
      auto it = by_pair.find(pair);
      if (it == by_pair.end()) {
        throw Error("assemble_payoffs: missing estimate for " + pair.label());
      }
      const auto& levels = it->second->var_by_level;
      auto lv = std::find_if(levels.begin(), levels.end(), [beta](const auto& kv) {
        return std::abs(kv.first - beta) <= 1e-12;
      });
      if (lv == levels.end()) {
        throw Error("assemble_payoffs: risk level " + std::to_string(beta) + " not computed for " +
                    pair.label());
      }
      pm.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = lv->second;
    }
  }
  for (int j = 0; j < pm.cols(); ++j) {
    const auto col = pm.entries.col(j);
    const bool has_nan = col.array().isNaN().any();
    const bool has_inf = (col.array() == kUnbounded).any();
    if (has_nan && !has_inf) {
      throw Error("assemble_payoffs: monitor " + std::to_string(pm.monitor_actions[static_cast<std::size_t>(j)] + 1) +
                  " has unevaluated entries but no Unbounded entry");
    }
  }
  return pm;
}

std::optional<std::pair<int, int>> find_pure_saddle(const PayoffMatrix& pm) {
  const auto cols = pm.admissible_columns();
  if (cols.empty()) throw NoSecurePlacement("every monitor column has an Unbounded payoff");
  Matrix j(pm.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) j.col(static_cast<Eigen::Index>(c)) = pm.entries.col(cols[c]);
  const double tol = tie_tolerance(j);
  const Vector col_max = j.colwise().maxCoeff();
  const Vector row_min = j.rowwise().minCoeff();

  // Action lists are sorted, so index order is lexicographic label order.
  for (Eigen::Index r = 0; r < j.rows(); ++r) {
    for (Eigen::Index c = 0; c < j.cols(); ++c) {
      if (j(r, c) >= col_max[c] - tol && j(r, c) <= row_min[r] + tol) {
        return std::make_pair(pm.attack_actions[static_cast<std::size_t>(r)],
                              pm.monitor_actions[static_cast<std::size_t>(cols[static_cast<std::size_t>(c)])]);
      }
    }
  }
  return std::nullopt;
}

GameSolution solve_mixed_nash(const PayoffMatrix& pm) {
  const auto cols = pm.admissible_columns();
  if (cols.empty()) throw NoSecurePlacement("every monitor column has an Unbounded payoff");
  if (pm.rows() == 0) throw Error("payoff matrix has no attack actions");

  Matrix j(pm.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) j.col(static_cast<Eigen::Index>(c)) = pm.entries.col(cols[c]);

  const MinMax detector = min_max_mix(j);
  const MinMax attacker = min_max_mix(-j.transpose());

  GameSolution sol;
  sol.detector_lp_value = detector.value;
  sol.attacker_lp_value = -attacker.value;
  sol.value = detector.value;
  sol.attacker_mix = attacker.mix;
  sol.detector_mix = Vector::Zero(pm.cols());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    sol.detector_mix[cols[c]] = detector.mix[static_cast<Eigen::Index>(c)];
  }
  for (int c = 0; c < pm.cols(); ++c) {
    if (std::find(cols.begin(), cols.end(), c) == cols.end()) {
      sol.pruned_monitors.push_back(pm.monitor_actions[static_cast<std::size_t>(c)]);
    }
  }
  sol.non_unique = detector.alternative_optima || attacker.alternative_optima;
  sol.pure_saddle = find_pure_saddle(pm);

  const double scale = std::max(1.0, std::abs(sol.value));
  if (std::abs(sol.detector_lp_value - sol.attacker_lp_value) > 1e-8 * scale) {
    throw SolverFailure("detector and attacker LP values disagree");
  }
  if (equilibrium_violation(pm, sol) > 1e-8 * scale) {
    throw SolverFailure("mixed strategies violate the no-deviation inequalities");
  }
  return sol;
}

double expected_payoff(const PayoffMatrix& pm, const Vector& attacker_mix,
                       const Vector& detector_mix) {
  if (attacker_mix.size() != pm.rows() || detector_mix.size() != pm.cols()) {
    throw Error("expected_payoff: mix dimension mismatch");
  }
  double total = 0.0;
  for (int c = 0; c < pm.cols(); ++c) {
    if (detector_mix[c] == 0.0) continue;
    if (!pm.entries.col(c).allFinite()) {
      throw Error("expected_payoff: detector mix puts mass on a pruned monitor");
    }
    total += detector_mix[c] * attacker_mix.dot(pm.entries.col(c));
  }
  return total;
}

double equilibrium_violation(const PayoffMatrix& pm, const GameSolution& sol) {
  const auto cols = pm.admissible_columns();
  double worst = 0.0;
  Vector jq = Vector::Zero(pm.rows());
  for (int c : cols) jq += sol.detector_mix[c] * pm.entries.col(c);
  for (Eigen::Index r = 0; r < jq.size(); ++r) worst = std::max(worst, jq[r] - sol.value);
  for (int c : cols) worst = std::max(worst, sol.value - sol.attacker_mix.dot(pm.entries.col(c)));
  return worst;
}

std::string format_payoff_table(const PayoffMatrix& pm, int precision) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"a\\m"};
  for (int m : pm.monitor_actions) header.push_back(std::to_string(m + 1));
  cells.push_back(header);
  for (int r = 0; r < pm.rows(); ++r) {
    std::vector<std::string> row{std::to_string(pm.attack_actions[static_cast<std::size_t>(r)] + 1)};
    for (int c = 0; c < pm.cols(); ++c) {
      const double v = pm.entries(r, c);
      if (std::isnan(v)) {
        row.emplace_back("-");
      } else if (is_unbounded(v)) {
        row.emplace_back("inf");
      } else {
        std::ostringstream os;
        os << std::fixed << std::setprecision(precision) << v;
        row.push_back(os.str());
      }
    }
    cells.push_back(row);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << row[c];
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace stealthrisk
