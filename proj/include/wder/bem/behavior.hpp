#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "wder/nn/policy.hpp"
#include "wder/ot/feature_map.hpp"

namespace wder::bem {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// T observations shared by both policies of a comparison.
struct StateSet {
  MatrixXd states;  // T x obs_dim
  std::string source;
  std::uint64_t id = 0;

  Index size() const { return states.rows(); }
};

/// Draws T states without replacement, half from each source where possible
/// and the remainder from whichever source still has states. Rows of
/// `from_k` / `from_l` are recorded observations.
StateSet collect_rollout_states(const MatrixXd& from_k, const MatrixXd& from_l,
                                Index T, std::uint64_t seed,
                                const std::string& source = "k|l");

/// K-source form: equal quotas per nonempty source, shortfalls filled from
/// sources that still have states.
StateSet collect_rollout_states(const std::vector<MatrixXd>& sources, Index T,
                                std::uint64_t seed,
                                const std::string& source = "all");

/// Seeded source of common random numbers. Two streams with the same seed
/// yield the same sequence of blocks.
struct CrnStream {
  std::uint64_t seed = 0;
  std::uint64_t draws = 0;

  MatrixXd normal(Index rows, Index cols);
  MatrixXd uniform(Index rows, Index cols);
};

enum class Coupling { Common, Independent };

/// Actions of two policies at a shared state set; row t*B + i is draw i at
/// state t. `noise_*` is what each policy consumed, which is all a later
/// pass needs to rebuild the samples at new parameters.
struct ActionPairs {
  nn::HeadType head = nn::HeadType::Gaussian;
  int action_dim = 0;  // Gaussian dim or number of categories
  MatrixXd obs;        // h x obs_dim
  MatrixXd actions_k, actions_l;
  MatrixXd noise_k, noise_l;
  std::uint64_t state_set_id = 0;

  Index rows() const { return obs.rows(); }
};

ActionPairs sample_action_pairs(const nn::PolicyNet& pi_k,
                                const nn::PolicyNet& pi_l,
                                const StateSet& states, int B, CrnStream& crn,
                                Coupling coupling = Coupling::Common);

/// Input dimension of the embedding for a policy's action space.
int embedding_input_dim(const nn::PolicyNet& pi);

/// Continuous actions pass through; categorical indices become one-hot rows.
MatrixXd embedding_inputs(nn::HeadType head, int action_dim,
                          const MatrixXd& actions);

struct PushforwardBatch {
  MatrixXd features;  // h x m
  int policy_id = -1;
  std::uint64_t state_set_id = 0;
};

PushforwardBatch pushforward(const ot::FeatureMap& map, const MatrixXd& inputs,
                             int policy_id = -1, std::uint64_t state_set_id = 0);

}  // namespace wder::bem
