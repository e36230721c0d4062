#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "wder/env/env.hpp"
#include "wder/env/movement_bandits.hpp"
#include "wder/env/point_reach.hpp"
#include "wder/hrl/agent.hpp"

namespace wder::harness {

/// Everything a run depends on. Serialized as `key = value` lines.
struct TrainConfig {
  std::string env = "movement_bandits";
  env::MovementBanditsConfig mb;
  env::PointReachConfig pr;

  hrl::AgentSpec agent;  // obs/action fields are filled from the env
  hrl::PpoParams ppo;
  hrl::WderParams wder;

  /// Recorded states kept per subpolicy for drawing the shared state set.
  int state_memory = 1024;
  /// "on" runs the regularizer; "off" is the code path with every
  /// regularizer and telemetry call removed.
  bool regularizer = true;

  long total_timesteps = 200000;
  int steps_per_update = 1000;  // rounded up to whole episodes
  /// Episodes between task resamples; 0 keeps one task for the whole run.
  int task_period = 100;
  bool master_reset = false;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;  // updates; 0 writes only the final checkpoint

  // transfer protocol
  int transfer_updates = 30;
  bool freeze_subpolicies = true;
  std::uint64_t transfer_task_seed = 1;

  std::string out_dir = "runs/default";

  void validate() const;
  /// Deterministic `key = value` text, one field per line, sorted by key.
  std::string to_kv() const;
  nlohmann::json to_json() const;
  /// 16 hex digits of FNV-1a over to_kv().
  std::string hash() const;

  /// Applies one `key = value` assignment; unknown keys are errors.
  void set(const std::string& key, const std::string& value);
  static TrainConfig parse(const std::string& text);
  static TrainConfig load(const std::filesystem::path& path);
  static std::vector<std::string> keys();
};

std::unique_ptr<env::Env> make_env(const TrainConfig& cfg);

/// Agent spec with the env's observation and action spaces filled in.
hrl::AgentSpec agent_spec_for(const TrainConfig& cfg, const env::Env& e);

}  // namespace wder::harness
