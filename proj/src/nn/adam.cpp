#include "wder/nn/adam.hpp"

#include <cmath>

#include "wder/errors.hpp"

namespace wder::nn {

StepResult opt_step(Eigen::Ref<Eigen::VectorXd> params,
                    const Eigen::VectorXd& grads, OptState& state) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw ShapeError("opt_step: parameter, gradient and moment sizes differ");
  if (!grads.allFinite())
    return {false, "non-finite gradient; update rejected at step " +
                       std::to_string(state.step)};

  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v +
            (1.0 - state.beta2) * grads.array().square().matrix();
  const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
  params.array() -= state.lr * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + state.eps);
  return {};
}

double clip_grad_norm(Eigen::VectorXd& g, double max_norm) {
  const double n = g.norm();
  if (max_norm > 0 && n > max_norm) g *= max_norm / n;
  return n;
}

}  // namespace wder::nn
