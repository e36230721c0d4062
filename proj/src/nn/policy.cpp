#include "wder/nn/policy.hpp"

#include <cmath>
#include <numbers>

#include "wder/errors.hpp"

namespace wder::nn {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2 pi)

void check_version(const PolicyCache& cache, std::uint64_t version) {
  if (cache.version != version)
    throw UsageError("stale cache: parameters changed since the forward pass");
}
}  // namespace

std::string to_string(HeadType h) {
  return h == HeadType::Categorical ? "categorical" : "gaussian";
}

HeadType head_from_string(const std::string& s) {
  if (s == "categorical") return HeadType::Categorical;
  if (s == "gaussian") return HeadType::Gaussian;
  throw ConfigError("unknown head type '" + s + "'");
}

PolicyNet::PolicyNet(const NetSpec& spec, Rng& rng)
    : spec_(spec), layout_(spec.obs_dim, spec.hidden, spec.action_dim) {
  const Index extra = spec.head == HeadType::Gaussian ? spec.action_dim : 0;
  params_ = VectorXd::Zero(layout_.param_count() + extra);
  layout_.init(params_.head(layout_.param_count()), rng, 1.0, 0.01);
  if (extra) params_.tail(extra).setConstant(spec.init_log_std);
}

HeadOutput PolicyNet::forward(const MatrixXd& obs, PolicyCache* cache) const {
  HeadOutput out;
  out.head = spec_.head;
  const auto body = params_.head(layout_.param_count());
  MatrixXd y = layout_.forward(body, obs, cache ? &cache->body : nullptr);
  if (cache) cache->version = version_;
  if (spec_.head == HeadType::Categorical) {
    out.logits = std::move(y);
  } else {
    out.mean = std::move(y);
    out.log_std = params_.tail(spec_.action_dim);
  }
  return out;
}

VectorXd PolicyNet::backward(const PolicyCache& cache,
                             const HeadGrad& grad) const {
  check_version(cache, version_);
  VectorXd g = VectorXd::Zero(params_.size());
  layout_.backward(params_.head(layout_.param_count()), cache.body,
                   grad.d_out, g.head(layout_.param_count()));
  if (spec_.head == HeadType::Gaussian && grad.d_log_std.size() > 0)
    g.tail(spec_.action_dim) += grad.d_log_std;
  return g;
}

ValueNet::ValueNet(int obs_dim, const std::vector<int>& hidden, Rng& rng)
    : layout_(obs_dim, hidden, 1) {
  params_ = VectorXd::Zero(layout_.param_count());
  layout_.init(params_, rng, 1.0, 1.0);
}

VectorXd ValueNet::forward(const MatrixXd& obs, PolicyCache* cache) const {
  MatrixXd y = layout_.forward(params_, obs, cache ? &cache->body : nullptr);
  if (cache) cache->version = version_;
  return y.col(0);
}

VectorXd ValueNet::backward(const PolicyCache& cache,
                            const VectorXd& d_value) const {
  check_version(cache, version_);
  VectorXd g = VectorXd::Zero(params_.size());
  layout_.backward(params_, cache.body, d_value, g);
  return g;
}

// ---------------------------------------------------------------------------

MatrixXd softmax(const MatrixXd& logits) {
  MatrixXd p = logits;
  for (Index i = 0; i < p.rows(); ++i) {
    p.row(i).array() -= p.row(i).maxCoeff();
    p.row(i) = p.row(i).array().exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

namespace {

VectorXd log_sum_exp(const MatrixXd& logits) {
  VectorXd out(logits.rows());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    out(i) = mx + std::log((logits.row(i).array() - mx).exp().sum());
  }
  return out;
}

int action_index(const HeadOutput& head, const MatrixXd& actions, Index i) {
  const double v = actions(i, 0);
  const auto a = static_cast<long>(std::lround(v));
  if (v != double(a) || a < 0 || a >= head.logits.cols())
    throw DomainError("categorical action " + std::to_string(v) +
                      " is outside [0, " + std::to_string(head.logits.cols()) +
                      ")");
  return static_cast<int>(a);
}

void check_rows(const HeadOutput& head, const MatrixXd& actions) {
  if (actions.rows() != head.rows())
    throw ShapeError("actions and head output have different batch sizes");
  if (head.head == HeadType::Gaussian && actions.cols() != head.mean.cols())
    throw ShapeError("gaussian action dimension mismatch");
}

}  // namespace

VectorXd log_prob(const HeadOutput& head, const MatrixXd& actions) {
  check_rows(head, actions);
  const Index n = head.rows();
  VectorXd lp(n);
  if (head.head == HeadType::Categorical) {
    const VectorXd lse = log_sum_exp(head.logits);
    for (Index i = 0; i < n; ++i)
      lp(i) = head.logits(i, action_index(head, actions, i)) - lse(i);
    return lp;
  }
  const Eigen::ArrayXd sd = head.log_std.array().exp();
  const double norm = head.log_std.sum() + kHalfLog2Pi * double(head.mean.cols());
  for (Index i = 0; i < n; ++i) {
    const Eigen::ArrayXd z =
        (actions.row(i) - head.mean.row(i)).transpose().array() / sd;
    lp(i) = -0.5 * z.square().sum() - norm;
  }
  return lp;
}

VectorXd entropy(const HeadOutput& head) {
  const Index n = head.rows();
  if (head.head == HeadType::Categorical) {
    const MatrixXd p = softmax(head.logits);
    const VectorXd lse = log_sum_exp(head.logits);
    VectorXd h(n);
    for (Index i = 0; i < n; ++i) {
      double s = 0;
      for (Index j = 0; j < p.cols(); ++j)
        if (p(i, j) > 0) s -= p(i, j) * (head.logits(i, j) - lse(i));
      h(i) = s;
    }
    return h;
  }
  const double h =
      head.log_std.sum() + (0.5 + kHalfLog2Pi) * double(head.mean.cols());
  return VectorXd::Constant(n, h);
}

HeadGrad log_prob_grad(const HeadOutput& head, const MatrixXd& actions,
                       const VectorXd& weights) {
  check_rows(head, actions);
  HeadGrad g;
  const Index n = head.rows();
  if (head.head == HeadType::Categorical) {
    g.d_out = -softmax(head.logits);
    for (Index i = 0; i < n; ++i) {
      g.d_out(i, action_index(head, actions, i)) += 1.0;
      g.d_out.row(i) *= weights(i);
    }
    return g;
  }
  const Eigen::ArrayXd var = (2.0 * head.log_std.array()).exp();
  g.d_out.resize(n, head.mean.cols());
  g.d_log_std = VectorXd::Zero(head.log_std.size());
  for (Index i = 0; i < n; ++i) {
    const Eigen::ArrayXd diff =
        (actions.row(i) - head.mean.row(i)).transpose().array();
    g.d_out.row(i) = (weights(i) * diff / var).matrix().transpose();
    g.d_log_std.array() += weights(i) * (diff.square() / var - 1.0);
  }
  return g;
}

HeadGrad entropy_grad(const HeadOutput& head, const VectorXd& weights) {
  HeadGrad g;
  const Index n = head.rows();
  if (head.head == HeadType::Categorical) {
    const MatrixXd p = softmax(head.logits);
    const VectorXd h = entropy(head);
    const VectorXd lse = log_sum_exp(head.logits);
    g.d_out.resize(n, p.cols());
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p.cols(); ++j) {
        const double logp = head.logits(i, j) - lse(i);
        g.d_out(i, j) = -weights(i) * p(i, j) * (logp + h(i));
      }
    return g;
  }
  g.d_out = MatrixXd::Zero(n, head.mean.cols());
  g.d_log_std = VectorXd::Constant(head.log_std.size(), weights.sum());
  return g;
}

MatrixXd sample(const HeadOutput& head, const MatrixXd& noise) {
  const Index n = head.rows();
  if (noise.rows() != n) throw ShapeError("sample: noise batch size mismatch");
  if (head.head == HeadType::Gaussian) {
    if (noise.cols() != head.mean.cols())
      throw ShapeError("sample: noise dimension mismatch");
    const Eigen::RowVectorXd sd = head.log_std.array().exp().matrix().transpose();
    MatrixXd a = noise.array().rowwise() * sd.array();
    return a + head.mean;
  }
  const MatrixXd p = softmax(head.logits);
  MatrixXd a(n, 1);
  for (Index i = 0; i < n; ++i) {
    const double u = noise(i, 0);
    double cdf = 0;
    Index k = p.cols() - 1;
    for (Index j = 0; j < p.cols(); ++j) {
      cdf += p(i, j);
      if (u < cdf) {
        k = j;
        break;
      }
    }
    a(i, 0) = double(k);
  }
  return a;
}

}  // namespace wder::nn
