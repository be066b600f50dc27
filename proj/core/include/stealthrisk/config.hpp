#pragma once

#include <string>

#include "stealthrisk/impact.hpp"
#include "stealthrisk/netgraph.hpp"
#include "stealthrisk/risk.hpp"

namespace stealthrisk {

// Everything a run needs. Parsed from one JSON document:
//
//   {
//     "description": "...",
//     "network": {
//       "n_vertices": 10, "target": 5,
//       "default_weight": -10, "default_uncertainty": [-0.5, 0.5],
//       "self_loop_gains": 0.5,            // or one value per vertex
//       "edges": [[1, 2], {"between": [2, 3], "weight": -8, "uncertainty": [-1, 1]}]
//     },
//     "scenario": {"epsilon1": 0.06, "beta1": 0.08, "samples": 450,
//                  "risk_levels": [0.08, 0.15], "seed": 2023},
//     "solver": {"gamma_cap": 1e6, "alarm_threshold": 1, "method": "joint"}
//   }
struct RunConfig {
  std::string description;
  NetworkDescription network;
  ScenarioConfig scenario;
  double gamma_cap = 1e6;
  double alarm_threshold = 1.0;
  ImpactMethod method = ImpactMethod::Joint;
  std::string source_text;  // the document exactly as read
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Built-in 10-vertex reconstruction used by `reproduce`.
const std::string& fixture_config_text();

}  // namespace stealthrisk
