#pragma once

#include <Eigen/Dense>

#include "wder/env/env.hpp"

namespace wder::env {

struct PointReachConfig {
  double arena = 1.0;      // positions live in [-arena, arena]^2
  double max_speed = 0.1;  // action norm bound
  int horizon = 50;

  void validate() const;
};

/// Continuous point mass: observation = (position, goal), action = velocity
/// clipped to `max_speed` in norm, reward = -distance to goal after moving.
class PointReach final : public Env {
 public:
  explicit PointReach(PointReachConfig cfg = {});

  std::string name() const override { return "point_reach"; }
  int obs_dim() const override { return 4; }
  nn::HeadType action_head() const override { return nn::HeadType::Gaussian; }
  int action_dim() const override { return 2; }
  int horizon() const override { return cfg_.horizon; }

  void sample_task(std::uint64_t seed) override;
  VectorXd reset(std::uint64_t seed) override;
  EnvStep step(const VectorXd& action) override;
  nlohmann::json geometry() const override;

  void set_state(const Eigen::Vector2d& pos, const Eigen::Vector2d& goal);
  const Eigen::Vector2d& position() const { return pos_; }
  const Eigen::Vector2d& goal() const { return goal_; }
  const PointReachConfig& config() const { return cfg_; }

 private:
  VectorXd observe() const;

  PointReachConfig cfg_;
  Eigen::Vector2d pos_ = Eigen::Vector2d::Zero();
  Eigen::Vector2d goal_ = Eigen::Vector2d::Zero();
  int steps_ = 0;
};

}  // namespace wder::env
