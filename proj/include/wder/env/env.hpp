#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "json.hpp"
#include "wder/nn/policy.hpp"

namespace wder::env {

using Eigen::VectorXd;

struct EnvStep {
  VectorXd observation;
  double reward = 0.0;
  bool done = false;
  std::map<std::string, double> info;
};

/// Episodic environment. A task persists across episodes until
/// `sample_task` is called again; `reset` starts a new episode of the
/// current task.
class Env {
 public:
  virtual ~Env() = default;

  virtual std::string name() const = 0;
  virtual int obs_dim() const = 0;
  virtual nn::HeadType action_head() const = 0;
  /// Number of discrete actions, or continuous action dimension.
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;

  virtual void sample_task(std::uint64_t seed) = 0;
  virtual VectorXd reset(std::uint64_t seed) = 0;
  /// Categorical actions are passed as a length-1 vector holding the index.
  virtual EnvStep step(const VectorXd& action) = 0;

  virtual nlohmann::json geometry() const = 0;
};

}  // namespace wder::env
