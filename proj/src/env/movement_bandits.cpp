#include "wder/env/movement_bandits.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wder/errors.hpp"
#include "wder/random.hpp"

namespace wder::env {

void MovementBanditsConfig::validate() const {
  if (!(arena > 0)) throw ConfigError("movement_bandits: arena must be > 0");
  if (!(step_size > 0)) throw ConfigError("movement_bandits: step must be > 0");
  if (!(reward_radius > 0))
    throw ConfigError("movement_bandits: reward radius must be > 0");
  if (horizon < 1) throw ConfigError("movement_bandits: horizon must be >= 1");
  if (targets < 1) throw ConfigError("movement_bandits: targets must be >= 1");
}

MovementBandits::MovementBandits(MovementBanditsConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  s_.targets.assign(static_cast<std::size_t>(cfg_.targets),
                    Eigen::Vector2d::Zero());
  s_.agent_pos.setConstant(cfg_.arena / 2);
}

void MovementBandits::sample_task(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0x7a5c}));
  std::uniform_int_distribution<int> pick(0, cfg_.targets - 1);
  s_.correct_index = pick(rng);
}

VectorXd MovementBandits::reset(std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0xe915}));
  std::uniform_real_distribution<double> u(0.0, cfg_.arena);
  for (auto& t : s_.targets) t = {u(rng), u(rng)};
  s_.agent_pos.setConstant(cfg_.arena / 2);
  s_.steps = 0;
  return observe();
}

VectorXd MovementBandits::mb_reset(std::uint64_t seed) {
  sample_task(seed);
  return reset(seed);
}

VectorXd MovementBandits::observe() const {
  VectorXd o(obs_dim());
  o.head<2>() = s_.agent_pos / cfg_.arena;
  for (std::size_t i = 0; i < s_.targets.size(); ++i)
    o.segment<2>(2 + 2 * Eigen::Index(i)) = s_.targets[i] / cfg_.arena;
  return o;
}

EnvStep MovementBandits::mb_step(int action) {
  if (action < 0 || action >= kActions)
    throw DomainError("movement_bandits: action " + std::to_string(action) +
                      " is not in 0..4");
  static const Eigen::Vector2d kMoves[kActions] = {
      {0, 1}, {0, -1}, {-1, 0}, {1, 0}, {0, 0}};
  s_.agent_pos = (s_.agent_pos + cfg_.step_size * kMoves[action])
                     .cwiseMax(0.0)
                     .cwiseMin(cfg_.arena);
  ++s_.steps;
  EnvStep out;
  const double dist =
      (s_.agent_pos - s_.targets[std::size_t(s_.correct_index)]).norm();
  out.reward = dist <= cfg_.reward_radius ? 1.0 : 0.0;
  out.done = s_.steps >= cfg_.horizon;
  out.observation = observe();
  return out;
}

EnvStep MovementBandits::step(const VectorXd& action) {
  if (action.size() != 1) throw ShapeError("movement_bandits: expected 1 index");
  const double a = action(0);
  if (a != std::floor(a))
    throw DomainError("movement_bandits: non-integer action index");
  return mb_step(static_cast<int>(a));
}

nlohmann::json MovementBandits::geometry() const {
  return {{"env", name()},
          {"arena", cfg_.arena},
          {"step_size", cfg_.step_size},
          {"reward_radius", cfg_.reward_radius},
          {"horizon", cfg_.horizon},
          {"targets", cfg_.targets}};
}

}  // namespace wder::env
