// Scenario configuration files: JSON, or a flat TOML subset with the same keys.
#pragma once

#include <filesystem>
#include <string>

#include "chebcon/runner.hpp"

namespace chebcon {

// Recognised keys (all optional):
//   paper_defaults, N, graph, graph_seed, failure_rate, connectivity_window,
//   U, epsilon, K1, K2, noise_family, noise_location, noise_scale, alpha, p,
//   gamma, prior, prior_degree, seed, oracle_grid, max_rounds,
//   objectives_a, objectives_b, constraints_lo, constraints_hi
// Unknown keys are rejected.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config_json(const std::string& text);
ScenarioConfig parse_config_toml(const std::string& text);

}  // namespace chebcon
