#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "quadrl/control/attitude.hpp"
#include "quadrl/env/quad_env.hpp"
#include "quadrl/eval/metrics.hpp"
#include "quadrl/eval/paths.hpp"
#include "quadrl/rl/sac_agent.hpp"

namespace quadrl::app {

enum class Precision { F32, F64 };

/// Everything a run needs. Defaults reproduce the published hyperparameters;
/// a config file overrides defaults and command-line overrides win over both.
struct RunConfig {
  env::EnvSettings env;
  rl::SacConfig sac;
  env::Task task = env::Task::Stabilize;
  control::ActionSpace action_space = control::ActionSpace::ThrustVector;
  std::int64_t total_steps = 300'000;
  std::uint64_t seed = 1;
  std::int64_t checkpoint_interval = 50'000;  // env steps; final checkpoint always written
  Precision precision = Precision::F32;
  int eval_episodes = 10;
  std::uint64_t eval_seed = 12345;
  eval::MetricsOptions metrics;
  eval::Helix helix;
  eval::Lemniscate lemniscate;

  void validate() const;
};

/// Flat `section.key` -> value view of every setting, in file order.
std::vector<std::pair<std::string, std::string>> to_entries(const RunConfig& cfg);

/// Sectioned key-value text (`[section]` then `key = value`), loadable by apply_ini_text.
std::string to_ini(const RunConfig& cfg);

/// Applies one `section.key = value`. Unknown keys and bad values throw ConfigError.
void set_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value);

/// Applies every key found in INI text on top of `cfg`.
void apply_ini_text(RunConfig& cfg, const std::string& text, const std::string& origin);
void apply_ini_file(RunConfig& cfg, const std::filesystem::path& path);

/// Applies `section.key=value` strings.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides);

/// Named budgets: `full-stabilize`, `full-track`, `desk`.
void apply_profile(RunConfig& cfg, const std::string& name);

const char* to_string(Precision p);

}  // namespace quadrl::app
