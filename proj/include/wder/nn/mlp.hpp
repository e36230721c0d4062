#pragma once

#include <Eigen/Dense>

#include <vector>

#include "wder/random.hpp"

namespace wder::nn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using ParamRef = Eigen::Ref<VectorXd>;
using ConstParamRef = Eigen::Ref<const VectorXd>;

/// Activations recorded by a forward pass; `inputs[l]` is the input to layer l
/// (one sample per row).
struct MlpCache {
  std::vector<MatrixXd> inputs;
  MatrixXd output;
  std::uint64_t version = 0;
};

/// Shape of a dense tanh network. Parameters live in an external flat vector
/// laid out layer by layer as [W_l (out x in, column-major), b_l (out)].
class MlpLayout {
 public:
  MlpLayout() = default;
  MlpLayout(int input, std::vector<int> hidden, int output);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Index param_count() const { return param_count_; }

  /// Weights ~ N(0, gain^2 / fan_in), biases zero; the last layer uses
  /// `out_gain`.
  void init(ParamRef params, Rng& rng, double hidden_gain,
            double out_gain) const;

  MatrixXd forward(ConstParamRef params, const MatrixXd& x,
                   MlpCache* cache = nullptr) const;

  /// Accumulates d(loss)/d(params) into `grad`; returns d(loss)/d(x).
  MatrixXd backward(ConstParamRef params, const MlpCache& cache,
                    const MatrixXd& grad_out, ParamRef grad) const;

 private:
  struct Slice {
    Index w_offset, b_offset;
    int in, out;
  };
  std::vector<int> sizes_;
  std::vector<Slice> slices_;
  Index param_count_ = 0;
};

}  // namespace wder::nn
