#include "stealthrisk/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stealthrisk {

namespace {

using nlohmann::json;

Interval parse_interval(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(what) + " must be a two-element numeric array");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

NetworkDescription parse_network(const json& j) {
  if (!j.is_object()) throw ConfigError("'network' must be an object");
  NetworkDescription d;
  if (!j.contains("n_vertices") || !j.contains("target") || !j.contains("edges")) {
    throw ConfigError("'network' needs n_vertices, target and edges");
  }
  d.n_vertices = get_or<int>(j, "n_vertices", 0);
  d.target = get_or<int>(j, "target", 0);
  d.default_weight = get_or<double>(j, "default_weight", d.default_weight);
  if (j.contains("default_uncertainty")) {
    d.default_bound = parse_interval(j["default_uncertainty"], "default_uncertainty");
  }
  const json gains = j.value("self_loop_gains", json(0.5));
  if (gains.is_number()) {
    d.self_loop_gains = {gains.get<double>()};
  } else if (gains.is_array()) {
    for (const auto& g : gains) {
      if (!g.is_number()) throw ConfigError("self_loop_gains entries must be numbers");
      d.self_loop_gains.push_back(g.get<double>());
    }
  } else {
    throw ConfigError("self_loop_gains must be a number or an array");
  }

  const json& edges = j["edges"];
  if (!edges.is_array()) throw ConfigError("'edges' must be an array");
  for (const auto& e : edges) {
    NetworkDescription::EdgeEntry entry;
    const json* ends = &e;
    if (e.is_object()) {
      if (!e.contains("between")) throw ConfigError("edge objects need a 'between' pair");
      ends = &e["between"];
      if (e.contains("weight")) entry.weight = get_or<double>(e, "weight", 0.0);
      if (e.contains("uncertainty")) entry.bound = parse_interval(e["uncertainty"], "edge uncertainty");
    }
    if (!ends->is_array() || ends->size() != 2 || !(*ends)[0].is_number_integer() ||
        !(*ends)[1].is_number_integer()) {
      throw ConfigError("edge endpoints must be a pair of integers");
    }
    entry.from = (*ends)[0].get<int>();
    entry.to = (*ends)[1].get<int>();
    d.edges.push_back(entry);
  }
  return d;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  if (!doc.contains("network")) throw ConfigError("config lacks a 'network' section");

  RunConfig cfg;
  cfg.source_text = text;
  cfg.description = get_or<std::string>(doc, "description", "");
  cfg.network = parse_network(doc["network"]);

  const json scenario = doc.value("scenario", json::object());
  auto& sc = cfg.scenario;
  sc.epsilon1 = get_or<double>(scenario, "epsilon1", sc.epsilon1);
  sc.beta1 = get_or<double>(scenario, "beta1", sc.beta1);
  sc.m1 = get_or<int>(scenario, "samples", sc.m1);
  sc.master_seed = get_or<std::uint64_t>(scenario, "seed", sc.master_seed);
  if (scenario.contains("risk_levels")) sc.risk_levels = get_or<std::vector<double>>(scenario, "risk_levels", {});

  const json solver = doc.value("solver", json::object());
  cfg.gamma_cap = get_or<double>(solver, "gamma_cap", cfg.gamma_cap);
  cfg.alarm_threshold = get_or<double>(solver, "alarm_threshold", cfg.alarm_threshold);
  const auto method = get_or<std::string>(solver, "method", "joint");
  if (method == "joint") {
    cfg.method = ImpactMethod::Joint;
  } else if (method == "bisection") {
    cfg.method = ImpactMethod::Bisection;
  } else {
    throw ConfigError("solver.method must be 'joint' or 'bisection'");
  }
  if (!(cfg.gamma_cap > 0.0)) throw ConfigError("solver.gamma_cap must be positive");
  if (!(cfg.alarm_threshold > 0.0)) throw ConfigError("solver.alarm_threshold must be positive");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace stealthrisk
