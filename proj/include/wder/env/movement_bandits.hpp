#pragma once

#include <Eigen/Dense>

#include <vector>

#include "wder/env/env.hpp"

namespace wder::env {

struct MovementBanditsConfig {
  double arena = 100.0;
  double step_size = 5.0;
  double reward_radius = 10.0;
  int horizon = 50;
  int targets = 2;

  void validate() const;
};

struct MovementBanditsState {
  Eigen::Vector2d agent_pos;
  std::vector<Eigen::Vector2d> targets;
  int correct_index = 0;
  int steps = 0;
};

/// Planar navigation toward one of several visible targets. Which target
/// pays is hidden and fixed per task; observations are agent and target
/// positions divided by the arena size.
class MovementBandits final : public Env {
 public:
  enum Action { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4 };
  static constexpr int kActions = 5;

  explicit MovementBandits(MovementBanditsConfig cfg = {});

  std::string name() const override { return "movement_bandits"; }
  int obs_dim() const override { return 2 + 2 * cfg_.targets; }
  nn::HeadType action_head() const override {
    return nn::HeadType::Categorical;
  }
  int action_dim() const override { return kActions; }
  int horizon() const override { return cfg_.horizon; }

  void sample_task(std::uint64_t seed) override;
  VectorXd reset(std::uint64_t seed) override;
  EnvStep step(const VectorXd& action) override;
  nlohmann::json geometry() const override;

  /// New task and new episode from one seed.
  VectorXd mb_reset(std::uint64_t seed);
  EnvStep mb_step(int action);

  const MovementBanditsState& state() const { return s_; }
  MovementBanditsState& mutable_state() { return s_; }
  const MovementBanditsConfig& config() const { return cfg_; }
  VectorXd observe() const;

 private:
  MovementBanditsConfig cfg_;
  MovementBanditsState s_;
};

}  // namespace wder::env
