#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "wder/hrl/agent.hpp"
#include "wder/hrl/regularizer.hpp"

namespace wder::hrl {

/// One environment step taken by a subpolicy.
struct StepRecord {
  VectorXd obs;
  VectorXd action;
  double reward = 0.0;
  VectorXd next_obs;
  double value = 0.0;
  double log_prob = 0.0;
  int subpolicy = 0;
  bool done = false;
  /// True on the first step after a master decision.
  bool decision = false;
};

/// One master decision; `reward` is the discounted return over the tenure.
struct DecisionRecord {
  VectorXd obs;
  int choice = 0;
  double reward = 0.0;
  double value = 0.0;
  double log_prob = 0.0;
  int steps = 0;
  bool done = false;
};

/// Experience from whole episodes. Advantages are filled by
/// `compute_advantages` once every episode in the buffer has finished.
struct RolloutBuffer {
  std::vector<StepRecord> steps;
  std::vector<DecisionRecord> decisions;
  std::vector<double> advantages, returns;
  std::vector<double> master_advantages, master_returns;

  bool empty() const { return steps.empty(); }
  void clear();
  /// Steps whose subpolicy is `k`.
  std::vector<Index> indices_of(int k) const;
};

struct GaeResult {
  VectorXd advantages;
  VectorXd returns;
};

/// Generalized advantage estimation over one segment.
GaeResult gae(const VectorXd& rewards, const VectorXd& values, double bootstrap,
              double discount, double lambda);

/// Per-segment GAE for subpolicy steps (bootstrapping from the acting
/// subpolicy's critic when a segment ends before the episode does) and
/// per-episode GAE for master decisions at discount^duration.
void compute_advantages(RolloutBuffer& buf, const HierAgent& agent,
                        const PpoParams& ppo);

struct UpdateStats {
  bool skipped = false;
  std::string diagnostic;
  Index samples = 0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double wd_term = 0.0;
  int rejected_steps = 0;
};

/// Clipped-surrogate update of subpolicy k with the WDER term folded in.
/// `reg` holds the potentials fitted once for this update; pass nullptr or
/// alpha = 0 to train without the regularizer. When k has no steps in the
/// buffer but `reg` is given, only the regularizer moves theta_k.
UpdateStats ppo_update_subpolicy(int k, HierAgent& agent,
                                 const RolloutBuffer& buf, const PpoParams& ppo,
                                 const WderCache* reg, double alpha,
                                 const WderParams& wder, std::uint64_t seed);

/// Clipped-surrogate update of the master on decision records. No WDER term.
UpdateStats ppo_update_master(HierAgent& agent, const RolloutBuffer& buf,
                              const PpoParams& ppo, std::uint64_t seed);

}  // namespace wder::hrl
