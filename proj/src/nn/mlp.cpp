#include "wder/nn/mlp.hpp"

#include <cmath>
#include <random>

#include "wder/errors.hpp"

namespace wder::nn {

MlpLayout::MlpLayout(int input, std::vector<int> hidden, int output) {
  if (input < 1 || output < 1) throw ConfigError("mlp: empty input or output");
  sizes_.push_back(input);
  for (int h : hidden) {
    if (h < 1) throw ConfigError("mlp: hidden width must be >= 1");
    sizes_.push_back(h);
  }
  sizes_.push_back(output);
  Index offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    Slice s{offset, offset + Index(sizes_[l]) * sizes_[l + 1], sizes_[l],
            sizes_[l + 1]};
    slices_.push_back(s);
    offset = s.b_offset + s.out;
  }
  param_count_ = offset;
}

void MlpLayout::init(ParamRef params, Rng& rng, double hidden_gain,
                     double out_gain) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l < slices_.size(); ++l) {
    const auto& s = slices_[l];
    const double gain = l + 1 == slices_.size() ? out_gain : hidden_gain;
    const double sd = gain / std::sqrt(double(s.in));
    for (Index k = 0; k < Index(s.in) * s.out; ++k)
      params(s.w_offset + k) = sd * normal(rng);
    params.segment(s.b_offset, s.out).setZero();
  }
}

MatrixXd MlpLayout::forward(ConstParamRef params, const MatrixXd& x,
                            MlpCache* cache) const {
  if (x.cols() != input_dim())
    throw ShapeError("mlp: input has " + std::to_string(x.cols()) +
                     " columns, expected " + std::to_string(input_dim()));
  if (params.size() != param_count_)
    throw ShapeError("mlp: parameter vector has the wrong length");
  if (cache) cache->inputs.clear();
  MatrixXd a = x;
  for (std::size_t l = 0; l < slices_.size(); ++l) {
    const auto& s = slices_[l];
    Eigen::Map<const MatrixXd> W(params.data() + s.w_offset, s.out, s.in);
    Eigen::Map<const VectorXd> b(params.data() + s.b_offset, s.out);
    if (cache) cache->inputs.push_back(a);
    MatrixXd z = a * W.transpose();
    z.rowwise() += b.transpose();
    if (l + 1 < slices_.size())
      a = z.array().tanh();
    else
      a = std::move(z);
  }
  if (cache) cache->output = a;
  return a;
}

MatrixXd MlpLayout::backward(ConstParamRef params, const MlpCache& cache,
                             const MatrixXd& grad_out, ParamRef grad) const {
  if (cache.inputs.size() != slices_.size())
    throw UsageError("mlp: cache does not come from this network");
  if (grad_out.rows() != cache.output.rows() ||
      grad_out.cols() != output_dim())
    throw ShapeError("mlp: upstream gradient shape mismatch");
  MatrixXd dz = grad_out;
  for (std::size_t l = slices_.size(); l-- > 0;) {
    const auto& s = slices_[l];
    const MatrixXd& in = cache.inputs[l];
    Eigen::Map<const MatrixXd> W(params.data() + s.w_offset, s.out, s.in);
    Eigen::Map<MatrixXd> dW(grad.data() + s.w_offset, s.out, s.in);
    dW.noalias() += dz.transpose() * in;
    grad.segment(s.b_offset, s.out) += dz.colwise().sum().transpose();
    MatrixXd da = dz * W;
    if (l == 0) return da;
    // input of layer l is tanh output of layer l-1
    dz = (da.array() * (1.0 - in.array().square())).matrix();
  }
  return dz;
}

}  // namespace wder::nn
