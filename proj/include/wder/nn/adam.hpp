#pragma once

#include <Eigen/Dense>

#include <string>

namespace wder::nn {

struct OptState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptState for_params(Eigen::Index n, double lr) {
    OptState s;
    s.m = Eigen::VectorXd::Zero(n);
    s.v = Eigen::VectorXd::Zero(n);
    s.lr = lr;
    return s;
  }
};

struct StepResult {
  bool applied = true;
  std::string diagnostic;
};

/// Bias-corrected adaptive-moment descent step: params -= lr * m_hat /
/// (sqrt(v_hat) + eps). Non-finite gradients leave params and state untouched.
StepResult opt_step(Eigen::Ref<Eigen::VectorXd> params,
                    const Eigen::VectorXd& grads, OptState& state);

/// Rescales `g` in place so its norm is at most `max_norm` (no-op when
/// max_norm <= 0). Returns the norm before clipping.
double clip_grad_norm(Eigen::VectorXd& g, double max_norm);

}  // namespace wder::nn
