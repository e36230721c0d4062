#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "wder/nn/mlp.hpp"
#include "wder/random.hpp"

namespace wder::nn {

enum class HeadType { Categorical, Gaussian };

std::string to_string(HeadType h);
HeadType head_from_string(const std::string& s);

struct NetSpec {
  int obs_dim = 1;
  /// Number of logits for a categorical head, action dimension otherwise.
  int action_dim = 1;
  HeadType head = HeadType::Categorical;
  std::vector<int> hidden{64, 64};
  double init_log_std = 0.0;
};

/// Distribution parameters for a batch of observations (one per row).
/// Categorical heads fill `logits`; Gaussian heads fill `mean` and `log_std`.
struct HeadOutput {
  HeadType head = HeadType::Categorical;
  MatrixXd logits;
  MatrixXd mean;
  VectorXd log_std;

  Index rows() const {
    return head == HeadType::Categorical ? logits.rows() : mean.rows();
  }
};

/// Upstream gradient with respect to a HeadOutput.
struct HeadGrad {
  MatrixXd d_out;      // d/dlogits or d/dmean
  VectorXd d_log_std;  // Gaussian only
};

struct PolicyCache {
  MlpCache body;
  std::uint64_t version = 0;
};

/// Feedforward actor: tanh MLP body with a categorical or diagonal-Gaussian
/// head. A Gaussian head carries a state-independent log-std vector stored
/// after the body parameters in the same flat vector.
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(const NetSpec& spec, Rng& rng);

  const NetSpec& spec() const { return spec_; }
  HeadType head() const { return spec_.head; }
  int obs_dim() const { return spec_.obs_dim; }
  int action_dim() const { return spec_.action_dim; }

  const VectorXd& params() const { return params_; }
  /// Mutable access invalidates every cache produced before the call.
  VectorXd& mutable_params() {
    ++version_;
    return params_;
  }
  Index param_count() const { return params_.size(); }
  const MlpLayout& layout() const { return layout_; }

  HeadOutput forward(const MatrixXd& obs, PolicyCache* cache = nullptr) const;
  VectorXd backward(const PolicyCache& cache, const HeadGrad& grad) const;

 private:
  NetSpec spec_;
  MlpLayout layout_;
  VectorXd params_;
  std::uint64_t version_ = 1;
};

/// Scalar critic.
class ValueNet {
 public:
  ValueNet() = default;
  ValueNet(int obs_dim, const std::vector<int>& hidden, Rng& rng);

  const VectorXd& params() const { return params_; }
  VectorXd& mutable_params() {
    ++version_;
    return params_;
  }
  Index param_count() const { return params_.size(); }
  const MlpLayout& layout() const { return layout_; }

  VectorXd forward(const MatrixXd& obs, PolicyCache* cache = nullptr) const;
  VectorXd backward(const PolicyCache& cache, const VectorXd& d_value) const;

 private:
  MlpLayout layout_;
  VectorXd params_;
  std::uint64_t version_ = 1;
};

// ---------------------------------------------------------------------------
// Distributions. Actions are stored one per row; a categorical action is its
// index held in column 0.

/// Log-probability of each row's action.
VectorXd log_prob(const HeadOutput& head, const MatrixXd& actions);
/// Closed-form entropy per row.
VectorXd entropy(const HeadOutput& head);

/// Gradient of sum_i w_i * log_prob_i with respect to the head output.
HeadGrad log_prob_grad(const HeadOutput& head, const MatrixXd& actions,
                       const VectorXd& weights);
/// Gradient of sum_i w_i * entropy_i with respect to the head output.
HeadGrad entropy_grad(const HeadOutput& head, const VectorXd& weights);

/// Gaussian: a = mean + exp(log_std) * noise, noise is rows x d standard
/// normal. Categorical: inverse-CDF index using noise(i, 0) ~ U[0, 1).
MatrixXd sample(const HeadOutput& head, const MatrixXd& noise);

/// Row-wise softmax.
MatrixXd softmax(const MatrixXd& logits);

}  // namespace wder::nn
