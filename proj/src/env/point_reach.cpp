#include "wder/env/point_reach.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wder/errors.hpp"
#include "wder/random.hpp"

namespace wder::env {

void PointReachConfig::validate() const {
  if (!(arena > 0)) throw ConfigError("point_reach: arena must be > 0");
  if (!(max_speed > 0)) throw ConfigError("point_reach: max_speed must be > 0");
  if (horizon < 1) throw ConfigError("point_reach: horizon must be >= 1");
}

PointReach::PointReach(PointReachConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void PointReach::sample_task(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0x90a1}));
  std::uniform_real_distribution<double> u(-cfg_.arena, cfg_.arena);
  goal_ = {u(rng), u(rng)};
}

VectorXd PointReach::reset(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0x5a27}));
  std::uniform_real_distribution<double> u(-cfg_.arena, cfg_.arena);
  pos_ = {u(rng), u(rng)};
  steps_ = 0;
  return observe();
}

void PointReach::set_state(const Eigen::Vector2d& pos,
                           const Eigen::Vector2d& goal) {
  pos_ = pos;
  goal_ = goal;
  steps_ = 0;
}

VectorXd PointReach::observe() const {
  VectorXd o(4);
  o << pos_, goal_;
  return o;
}

EnvStep PointReach::step(const VectorXd& action) {
  if (action.size() != 2) throw ShapeError("point_reach: expected 2-D action");
  EnvStep out;
  Eigen::Vector2d v = action;
  const double n = v.norm();
  if (!std::isfinite(n)) throw DomainError("point_reach: non-finite action");
  if (n > cfg_.max_speed) {
    v *= cfg_.max_speed / n;
    out.info["clipped"] = 1.0;
  } else {
    out.info["clipped"] = 0.0;
  }
  pos_ = (pos_ + v).cwiseMax(-cfg_.arena).cwiseMin(cfg_.arena);
  ++steps_;
  out.reward = -(pos_ - goal_).norm();
  out.done = steps_ >= cfg_.horizon;
  out.observation = observe();
  return out;
}

nlohmann::json PointReach::geometry() const {
  return {{"env", name()},
          {"arena", cfg_.arena},
          {"max_speed", cfg_.max_speed},
          {"horizon", cfg_.horizon}};
}

}  // namespace wder::env
