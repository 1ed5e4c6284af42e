#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zapsa/common.hpp"

namespace zapsa::config {

// One flat run description shared by every subcommand; unknown keys are
// rejected. Precedence: command-line --key=value > file > defaults.
struct RunConfig {
  std::string env = "six_state";  // six_state | scalar | stopping | path to an MDP json
  std::string algorithm = "zap";
  double beta = 0.8;
  std::optional<double> g;  // default 100 for gq0, 1 otherwise
  double rho = 0.85;
  double b = 1e4;
  double lambda = 0.0;
  long steps = 10000;
  int trials = 200;
  std::uint64_t seed = 1;
  std::vector<long> snapshots = {100, 1000, 10000, 100000, 1000000};
  std::optional<double> reward_cap;
  int batch = 100;
  int bins = 40;
  std::optional<double> init_low;   // default: -1e3 (beta <= 0.9) or -1e4
  std::optional<double> init_high;
  std::vector<std::pair<int, int>> edges;  // six-state topology override
  std::vector<double> gains;               // sweep grid override
  // stopping testbed
  double sigma = 0.02;
  double drift = 0.0004;
  int window = 100;
  int basis_dim = 10;
  int n_paths = 1000;
  int horizon = 2000;
  std::string out_dir = "out";

  double gain_or_default() const;
  double init_low_or_default() const;
  double init_high_or_default() const;
  std::vector<double> gain_grid_or_default() const;

  // Canonical JSON (sorted keys, defaults materialized).
  std::string canonical_json() const;
  // FNV-1a 64 over the canonical form, as 16 hex digits.
  std::string hash() const;
};

RunConfig from_json_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Applies one "--key=value" override; throws ConfigError for unknown keys or
// unparsable values.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

void validate(const RunConfig& cfg);

}  // namespace zapsa::config
