#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "wder/nn/adam.hpp"
#include "wder/nn/policy.hpp"
#include "wder/ot/dual.hpp"
#include "wder/ot/feature_map.hpp"

namespace wder::hrl {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct PpoParams {
  double clip = 0.2;
  int epochs = 4;
  int minibatches = 4;
  double discount = 0.99;
  double gae_lambda = 0.95;
  double entropy_coef = 0.01;
  double policy_lr = 3e-4;
  double value_lr = 1e-3;
  double max_grad_norm = 0.5;
  bool normalize_advantages = true;

  void validate() const;
};

/// Behaviour-embedding and dual-fit settings for the regularizer.
struct WderParams {
  ot::OtParams ot;
  int states = 32;   // T
  int actions = 8;   // B draws per state
  int features = 128;
  double bandwidth = 1.0;
  /// Softmax temperature of the straight-through pathway for categorical
  /// heads.
  double st_temperature = 0.5;

  void validate() const;
};

struct AgentSpec {
  int obs_dim = 1;
  nn::HeadType head = nn::HeadType::Categorical;
  int action_dim = 1;
  int K = 2;
  std::vector<int> hidden{64, 64};
  double init_log_std = 0.0;
  double alpha = 0.0;
  int subpolicy_duration = 10;

  void validate() const;
};

struct SubPolicy {
  nn::PolicyNet pi;
  nn::ValueNet v;
  nn::OptState opt_pi;
  nn::OptState opt_v;
};

/// Master policy over K subpolicies plus the shared behaviour embedding.
struct HierAgent {
  AgentSpec spec;
  nn::PolicyNet master;
  nn::ValueNet master_v;
  nn::OptState opt_master;
  nn::OptState opt_master_v;
  std::vector<SubPolicy> subs;
  ot::FeatureMap map;

  HierAgent() = default;
  HierAgent(const AgentSpec& spec, const PpoParams& ppo,
            const WderParams& wder, std::uint64_t seed);

  int K() const { return spec.K; }
  /// Fresh master networks and optimizer state drawn from `seed`.
  void reinit_master(const PpoParams& ppo, std::uint64_t seed);
};

}  // namespace wder::hrl
