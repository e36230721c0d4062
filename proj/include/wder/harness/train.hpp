#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wder/harness/config.hpp"
#include "wder/hrl/ppo.hpp"

namespace wder::harness {

namespace fs = std::filesystem;

inline constexpr const char* kCodeVersion = "0.1.0";

/// Recent observations per subpolicy, oldest first.
struct StateMemory {
  std::vector<std::vector<Eigen::VectorXd>> per_sub;
  int capacity = 1024;

  void add(int k, const Eigen::VectorXd& obs);
  Eigen::MatrixXd matrix(int k, int obs_dim) const;
  bool empty(int k) const { return per_sub[std::size_t(k)].empty(); }
};

/// Full resumable training state.
struct TrainState {
  hrl::HierAgent agent;
  StateMemory memory;
  int update = 0;
  long timesteps = 0;
  long episodes = 0;
};

struct MetricRow {
  int update = 0;
  long timestep = 0;
  long episodes = 0;
  double avg_return = 0.0;
  int task = 0;
  hrl::UpdateStats master;
  std::vector<hrl::UpdateStats> subs;
  std::vector<long> sub_steps;
  /// wd(k, j) for ordered pairs; NaN when not computed.
  std::vector<std::vector<double>> wd;
  std::vector<double> wd_min;
  long clamp_events = 0;
};

struct RunArtifacts {
  fs::path dir;
  std::string run_id;
  std::vector<MetricRow> rows;
  int updates = 0;
  long timesteps = 0;
  fs::path checkpoint;
  hrl::HierAgent agent;  // state at the end of the run
};

struct TrainOptions {
  /// Resume from this checkpoint instead of starting fresh.
  fs::path resume_from;
  /// Stop (with a checkpoint) after this many total updates; < 0 runs to
  /// the configured budget.
  int stop_after_updates = -1;
  /// Write metrics.csv, manifest.json and checkpoints under cfg.out_dir.
  bool write_files = true;
};

/// Hierarchical training loop: whole episodes per update, master update on
/// decision records, then each subpolicy update with its WDER term.
RunArtifacts train(const TrainConfig& cfg, const TrainOptions& opts = {});

struct TransferResult {
  RunArtifacts run;
  std::vector<double> curve;  // average return per master update
};

/// Freezes the subpolicies from `checkpoint`, reinitializes the master and
/// trains only the master on a resampled task.
TransferResult transfer_eval(const fs::path& checkpoint, const TrainConfig& cfg,
                             bool write_files = true);

/// Column names of metrics.csv for K subpolicies.
std::vector<std::string> metric_columns(int K);
std::string format_row(const MetricRow& row, const std::string& run_id, int K);

void save_checkpoint(const fs::path& path, const TrainState& st,
                     const TrainConfig& cfg);
TrainState load_checkpoint(const fs::path& path, const TrainConfig& cfg);

/// Task index in force for a given episode number.
int task_index(const TrainConfig& cfg, long episode);

}  // namespace wder::harness
