#include "stealthrisk/io.hpp"

#include <charconv>
#include <iomanip>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

namespace stealthrisk {

namespace {

using nlohmann::json;

json number_or_tag(double v) {
  if (std::isnan(v)) return nullptr;
  if (is_unbounded(v)) return "Unbounded";
  return v;
}

double parse_number_or_tag(const json& j) {
  if (j.is_null()) return std::nan("");
  if (j.is_string()) {
    if (j.get<std::string>() == "Unbounded") return kUnbounded;
    throw ConfigError("unexpected tag '" + j.get<std::string>() + "' in VaR table");
  }
  return j.get<double>();
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "NotEvaluated";
  if (is_unbounded(v)) return "Unbounded";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string feasibility_csv(const std::vector<FeasibilityRow>& rows) {
  std::ostringstream os;
  os << "attack,monitor,r_target,r_monitor,verdict\r\n";
  for (const auto& r : rows) {
    os << r.pair.attack + 1 << ',' << r.pair.monitor + 1 << ',' << r.r_target << ','
       << r.r_monitor << ',' << to_string(r.verdict) << "\r\n";
  }
  return os.str();
}

std::string samples_csv(const RiskEstimate& estimate) {
  std::ostringstream os;
  os << "pair,sample_index,gamma_star\r\n";
  const std::string label = estimate.pair.label();
  for (std::size_t i = 0; i < estimate.sample_values.size(); ++i) {
    os << label << ',' << i + 1 << ',' << format_number(estimate.sample_values[i]) << "\r\n";
  }
  return os.str();
}

std::string var_json(const std::vector<RiskEstimate>& estimates, const ScenarioConfig& cfg) {
  json levels = json::object();
  json pairs = json::object();
  for (const auto& e : estimates) {
    json var = json::object();
    for (const auto& [beta, value] : e.var_by_level) {
      var[format_number(beta)] = number_or_tag(value);
      levels[format_number(beta)][e.pair.label()] = number_or_tag(value);
    }
    pairs[e.pair.label()] = {
        {"attack", e.pair.attack + 1},
        {"monitor", e.pair.monitor + 1},
        {"evaluated", e.evaluated},
        {"bounded_count", e.bounded_count},
        {"failed_samples", e.failed_samples},
        {"bounded_at_beta1", e.bounded_at(cfg.beta1)},
        {"var", var},
    };
  }
  json doc = {
      {"scenario",
       {{"epsilon1", cfg.epsilon1},
        {"beta1", cfg.beta1},
        {"samples", cfg.m1},
        {"required_samples", required_samples(cfg.epsilon1, cfg.beta1)},
        {"seed", cfg.master_seed},
        {"risk_levels", cfg.risk_levels}}},
      {"levels", levels},
      {"pairs", pairs},
  };
  return doc.dump(2) + "\n";
}

std::vector<RiskEstimate> load_var_json(const std::string& text, std::vector<double>* levels) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("VaR table is not valid JSON: ") + e.what());
  }
  if (!doc.contains("pairs")) throw ConfigError("VaR table lacks 'pairs'");
  std::vector<RiskEstimate> out;
  try {
    for (const auto& [label, p] : doc["pairs"].items()) {
      RiskEstimate e;
      e.pair = {p.at("attack").get<int>() - 1, p.at("monitor").get<int>() - 1};
      e.evaluated = p.at("evaluated").get<bool>();
      e.bounded_count = p.at("bounded_count").get<int>();
      e.failed_samples = p.at("failed_samples").get<int>();
      for (const auto& [beta, v] : p.at("var").items()) {
        e.var_by_level[std::stod(beta)] = parse_number_or_tag(v);
      }
      out.push_back(std::move(e));
    }
    if (levels) *levels = doc.at("scenario").at("risk_levels").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed VaR table: ") + e.what());
  }
  return out;
}

std::string game_json(const PayoffMatrix& pm, const GameSolution& sol, double beta) {
  json entries = json::array();
  for (int r = 0; r < pm.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < pm.cols(); ++c) row.push_back(number_or_tag(pm.entries(r, c)));
    entries.push_back(row);
  }
  auto labels = [](const std::vector<int>& v) {
    json out = json::array();
    for (int x : v) out.push_back(x + 1);
    return out;
  };
  json attacker = json::object();
  for (int r = 0; r < pm.rows(); ++r) {
    attacker[std::to_string(pm.attack_actions[static_cast<std::size_t>(r)] + 1)] = sol.attacker_mix[r];
  }
  json detector = json::object();
  for (int c = 0; c < pm.cols(); ++c) {
    detector[std::to_string(pm.monitor_actions[static_cast<std::size_t>(c)] + 1)] = sol.detector_mix[c];
  }
  json saddle = nullptr;
  if (sol.pure_saddle) {
    saddle = {{"attack", sol.pure_saddle->first + 1}, {"monitor", sol.pure_saddle->second + 1}};
  }
  json doc = {
      {"risk_level", beta},
      {"attack_actions", labels(pm.attack_actions)},
      {"monitor_actions", labels(pm.monitor_actions)},
      {"payoffs", entries},
      {"pruned_monitors", labels(sol.pruned_monitors)},
      {"value", sol.value},
      {"detector_lp_value", sol.detector_lp_value},
      {"attacker_lp_value", sol.attacker_lp_value},
      {"attacker_mix", attacker},
      {"detector_mix", detector},
      {"pure_saddle", saddle},
      {"non_unique", sol.non_unique},
  };
  return doc.dump(2) + "\n";
}

std::string manifest_json(const RunManifest& m) {
  json doc = {
      {"config_digest", m.config_digest},
      {"seed", m.seed},
      {"m1", m.m1},
      {"epsilon1", m.epsilon1},
      {"beta1", m.beta1},
      {"risk_levels", m.risk_levels},
      {"tool_version", m.tool_version},
      {"timing_file", "timing.txt"},
  };
  return doc.dump(2) + "\n";
}

std::string timing_text(const RunManifest& m) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  for (const auto& [phase, seconds] : m.timing) os << phase << ' ' << seconds << " s\n";
  return os.str();
}

}  // namespace stealthrisk
