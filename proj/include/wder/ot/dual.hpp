#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wder/errors.hpp"
#include "wder/ot/feature_map.hpp"
#include "wder/random.hpp"

namespace wder::ot {

/// Which penalty the empirical dual estimate subtracts.
enum class DualForm {
  /// mean of mu - nu - s * exp((mu - nu - c) / s); the smoothed dual.
  Smoothed,
  /// mean of mu - nu - exp((mu - nu - c) / s) / s; kept for comparison only.
  ScaledPenalty,
};

struct OtParams {
  double smoothing = 0.1;
  double step_size = 0.01;
  int rounds = 500;
  int eval_samples = 256;
  double exp_clamp = 30.0;
  /// Caps the exponential factor used by the SGD step at 1 + 2 s / eta, so
  /// one step moves a potential gap by at most about twice the smoothing.
  /// The estimate itself only sees the overflow clamp.
  bool bounded_step = true;
  DualForm form = DualForm::Smoothed;

  double step_exp_ceiling() const {
    return std::log1p(2.0 * smoothing / step_size);
  }

  void validate() const {
    if (!(smoothing > 0)) throw ConfigError("ot: smoothing must be > 0");
    if (!(step_size > 0)) throw ConfigError("ot: step_size must be > 0");
    if (rounds < 1) throw ConfigError("ot: rounds must be >= 1");
    if (eval_samples < 1) throw ConfigError("ot: eval_samples must be >= 1");
    if (!(exp_clamp > 0)) throw ConfigError("ot: exp_clamp must be > 0");
  }
};

/// Dual potentials mu(x) = p_mu' phi(x), nu(y) = p_nu' phi(y).
template <typename Scalar>
struct DualPotentials {
  Vector<Scalar> p_mu;
  Vector<Scalar> p_nu;
  int rounds_run = 0;
  std::vector<Scalar> objective_trace;
  std::size_t clamp_events = 0;

  static DualPotentials zeros(Eigen::Index m) {
    DualPotentials p;
    p.p_mu = Vector<Scalar>::Zero(m);
    p.p_nu = Vector<Scalar>::Zero(m);
    return p;
  }
};

/// Squared Euclidean ground cost.
template <typename DerivedX, typename DerivedY>
auto cost(const Eigen::MatrixBase<DerivedX>& x,
          const Eigen::MatrixBase<DerivedY>& y) {
  if (x.size() != y.size())
    throw ShapeError("cost: dimension mismatch (" + std::to_string(x.size()) +
                     " vs " + std::to_string(y.size()) + ")");
  return (x.reshaped() - y.reshaped()).squaredNorm();
}

namespace detail {

template <typename Scalar>
Scalar clamped_exponent(Scalar arg, double limit, bool& clamped) {
  const Scalar lim(limit);
  clamped = arg > lim || arg < -lim;
  return std::clamp(arg, -lim, lim);
}

/// Per-sample dual integrand for a potential gap g = mu - nu and cost c.
template <typename Scalar>
Scalar dual_integrand(Scalar gap, Scalar c, const OtParams& params,
                      bool& clamped) {
  const Scalar s(params.smoothing);
  const Scalar f =
      std::exp(clamped_exponent((gap - c) / s, params.exp_clamp, clamped));
  return params.form == DualForm::Smoothed ? gap - s * f : gap - f / s;
}

}  // namespace detail

/// One stochastic ascent step on the smoothed dual (in place).
/// Returns the dual integrand evaluated at the pre-update potentials.
template <typename Scalar, typename DX, typename DY>
Scalar dual_sgd_update(DualPotentials<Scalar>& pot,
                       const Eigen::MatrixBase<DX>& phi_x,
                       const Eigen::MatrixBase<DY>& phi_y, Scalar c,
                       const OtParams& params) {
  if (phi_x.size() != pot.p_mu.size() || phi_y.size() != pot.p_nu.size())
    throw ShapeError("dual_sgd_step: feature/potential dimension mismatch");
  const Scalar gap =
      pot.p_mu.dot(phi_x.reshaped()) - pot.p_nu.dot(phi_y.reshaped());
  bool clamped = false;
  const Scalar s(params.smoothing);
  const Scalar arg =
      detail::clamped_exponent((gap - c) / s, params.exp_clamp, clamped);
  const Scalar f = std::exp(arg);
  Scalar f_step = f;
  if (params.bounded_step && arg > Scalar(params.step_exp_ceiling())) {
    f_step = std::exp(Scalar(params.step_exp_ceiling()));
    clamped = true;
  }
  if (clamped) ++pot.clamp_events;
  const Scalar step = (Scalar(1) - f_step) * Scalar(params.step_size);
  pot.p_mu += step * phi_x.reshaped();
  pot.p_nu -= step * phi_y.reshaped();
  return params.form == DualForm::Smoothed ? gap - s * f : gap - f / s;
}

template <typename Scalar, typename DX, typename DY>
DualPotentials<Scalar> dual_sgd_step(DualPotentials<Scalar> pot,
                                     const Eigen::MatrixBase<DX>& phi_x,
                                     const Eigen::MatrixBase<DY>& phi_y,
                                     Scalar c, const OtParams& params) {
  dual_sgd_update(pot, phi_x, phi_y, c, params);
  return pot;
}

// ---------------------------------------------------------------------------
// Pair samplers

template <typename Scalar>
using SamplePair = std::pair<RowVector<Scalar>, RowVector<Scalar>>;

/// Source of (x, y) pairs for dual fitting. An empty optional means the
/// source is exhausted.
template <typename Scalar>
class PairSampler {
 public:
  virtual ~PairSampler() = default;
  virtual std::optional<SamplePair<Scalar>> next(Rng& rng) = 0;
};

/// Independent draws from the product of two weighted point clouds.
template <typename Scalar>
class ProductSampler final : public PairSampler<Scalar> {
 public:
  ProductSampler(Matrix<Scalar> xs, std::vector<double> wx, Matrix<Scalar> ys,
                 std::vector<double> wy)
      : xs_(std::move(xs)), ys_(std::move(ys)),
        dx_(wx.begin(), wx.end()), dy_(wy.begin(), wy.end()) {
    if (static_cast<Eigen::Index>(wx.size()) != xs_.rows() ||
        static_cast<Eigen::Index>(wy.size()) != ys_.rows())
      throw ShapeError("ProductSampler: weight count does not match points");
  }

  std::optional<SamplePair<Scalar>> next(Rng& rng) override {
    const auto i = dx_(rng);
    const auto j = dy_(rng);
    return SamplePair<Scalar>{xs_.row(i), ys_.row(j)};
  }

 private:
  Matrix<Scalar> xs_, ys_;
  std::discrete_distribution<Eigen::Index> dx_, dy_;
};

/// Row-aligned draws: pick a row index i uniformly and return (x_i, y_i).
/// With common-random-number batches this samples the coupling the shared
/// draws induce.
template <typename Scalar>
class AlignedSampler final : public PairSampler<Scalar> {
 public:
  AlignedSampler(const Matrix<Scalar>& xs, const Matrix<Scalar>& ys)
      : xs_(xs), ys_(ys) {
    if (xs.rows() != ys.rows() || xs.rows() == 0)
      throw ShapeError("AlignedSampler: batches must have equal, nonzero rows");
  }

  std::optional<SamplePair<Scalar>> next(Rng& rng) override {
    std::uniform_int_distribution<Eigen::Index> pick(0, xs_.rows() - 1);
    const auto i = pick(rng);
    return SamplePair<Scalar>{xs_.row(i), ys_.row(i)};
  }

 private:
  const Matrix<Scalar>& xs_;
  const Matrix<Scalar>& ys_;
};

/// Replays a fixed list of pairs, then reports exhaustion.
template <typename Scalar>
class ScriptedSampler final : public PairSampler<Scalar> {
 public:
  explicit ScriptedSampler(std::vector<SamplePair<Scalar>> pairs)
      : pairs_(std::move(pairs)) {}

  std::optional<SamplePair<Scalar>> next(Rng&) override {
    if (pos_ >= pairs_.size()) return std::nullopt;
    return pairs_[pos_++];
  }

 private:
  std::vector<SamplePair<Scalar>> pairs_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Fitting and estimation

/// Runs `params.rounds` dual SGD steps from zero potentials on pairs that are
/// already in feature space.
template <typename Scalar>
DualPotentials<Scalar> fit_potentials_embedded(PairSampler<Scalar>& sampler,
                                               Eigen::Index features,
                                               const OtParams& params,
                                               std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  auto pot = DualPotentials<Scalar>::zeros(features);
  pot.objective_trace.reserve(static_cast<std::size_t>(params.rounds));
  Scalar running(0);
  for (int t = 0; t < params.rounds; ++t) {
    auto pair = sampler.next(rng);
    if (!pair)
      throw FitError("fit_potentials: sampler exhausted after " +
                     std::to_string(t) + " of " +
                     std::to_string(params.rounds) + " rounds");
    const auto& [x, y] = *pair;
    const Scalar c = cost(x, y);
    const Scalar obj = dual_sgd_update(pot, x, y, c, params);
    running += (obj - running) / Scalar(t + 1);
    pot.objective_trace.push_back(running);
    pot.rounds_run = t + 1;
  }
  return pot;
}

namespace detail {

template <typename Scalar>
class EmbeddingSampler final : public PairSampler<Scalar> {
 public:
  EmbeddingSampler(PairSampler<Scalar>& inner,
                   const RandomFeatureMap<Scalar>& mx,
                   const RandomFeatureMap<Scalar>& my)
      : inner_(inner), mx_(mx), my_(my) {}

  std::optional<SamplePair<Scalar>> next(Rng& rng) override {
    auto p = inner_.next(rng);
    if (!p) return std::nullopt;
    return SamplePair<Scalar>{embed(mx_, p->first), embed(my_, p->second)};
  }

 private:
  PairSampler<Scalar>& inner_;
  const RandomFeatureMap<Scalar>& mx_;
  const RandomFeatureMap<Scalar>& my_;
};

}  // namespace detail

/// Random-feature Wasserstein SGD: the sampler yields raw (x, y) pairs which
/// are embedded with `map_x` / `map_y` before each dual step.
template <typename Scalar>
DualPotentials<Scalar> fit_potentials(PairSampler<Scalar>& sampler,
                                      const RandomFeatureMap<Scalar>& map_x,
                                      const RandomFeatureMap<Scalar>& map_y,
                                      const OtParams& params,
                                      std::uint64_t seed) {
  if (map_x.features() != map_y.features())
    throw ShapeError("fit_potentials: maps must share the feature count");
  detail::EmbeddingSampler<Scalar> embedded(sampler, map_x, map_y);
  return fit_potentials_embedded(embedded, map_x.features(), params, seed);
}

/// Empirical dual estimate over C row-aligned embedded pairs. The result is
/// reported raw and may be slightly negative.
template <typename Scalar, typename DX, typename DY>
Scalar estimate_wd(const DualPotentials<Scalar>& pot,
                   const Eigen::MatrixBase<DX>& phi_x,
                   const Eigen::MatrixBase<DY>& phi_y,
                   const OtParams& params) {
  if (phi_x.rows() == 0)
    throw EstimationError("estimate_wd: no evaluation pairs");
  if (phi_x.rows() != phi_y.rows() || phi_x.cols() != phi_y.cols() ||
      phi_x.cols() != pot.p_mu.size())
    throw ShapeError("estimate_wd: evaluation pairs do not match potentials");
  const Vector<Scalar> mu = phi_x * pot.p_mu;
  const Vector<Scalar> nu = phi_y * pot.p_nu;
  Scalar total(0);
  for (Eigen::Index i = 0; i < phi_x.rows(); ++i) {
    bool clamped = false;
    const Scalar c = (phi_x.row(i) - phi_y.row(i)).squaredNorm();
    total += detail::dual_integrand(Scalar(mu(i) - nu(i)), c, params, clamped);
  }
  return total / Scalar(phi_x.rows());
}

/// Gradient of estimate_wd with respect to every row of `phi_x`, with the
/// potentials and `phi_y` held fixed. Shape C x m.
template <typename Scalar, typename DX, typename DY>
Matrix<Scalar> estimate_wd_grad_x(const DualPotentials<Scalar>& pot,
                                  const Eigen::MatrixBase<DX>& phi_x,
                                  const Eigen::MatrixBase<DY>& phi_y,
                                  const OtParams& params) {
  if (phi_x.rows() == 0)
    throw EstimationError("estimate_wd: no evaluation pairs");
  const Scalar s(params.smoothing);
  const Scalar inv_c = Scalar(1) / Scalar(phi_x.rows());
  Matrix<Scalar> grad(phi_x.rows(), phi_x.cols());
  for (Eigen::Index i = 0; i < phi_x.rows(); ++i) {
    const RowVector<Scalar> diff = phi_x.row(i) - phi_y.row(i);
    const Scalar c = diff.squaredNorm();
    const Scalar gap =
        phi_x.row(i).dot(pot.p_mu.transpose()) - phi_y.row(i).dot(pot.p_nu.transpose());
    bool clamped = false;
    const Scalar arg =
        detail::clamped_exponent((gap - c) / s, params.exp_clamp, clamped);
    const Scalar f = std::exp(arg);
    // d f / d arg is zero inside the clamped region
    const Scalar df = clamped ? Scalar(0) : f;
    // d arg / d x = (p_mu - 2 diff) / s
    const Scalar penalty_scale =
        params.form == DualForm::Smoothed ? df : df / (s * s);
    grad.row(i) = (pot.p_mu.transpose() -
                   penalty_scale * (pot.p_mu.transpose() - Scalar(2) * diff)) *
                  inv_c;
  }
  return grad;
}

/// Draws `count` pairs from a sampler into two row-aligned matrices.
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> draw_pairs(PairSampler<Scalar>& s,
                                                     Eigen::Index count,
                                                     Rng& rng) {
  Matrix<Scalar> xs, ys;
  for (Eigen::Index i = 0; i < count; ++i) {
    auto p = s.next(rng);
    if (!p)
      throw EstimationError("draw_pairs: sampler exhausted after " +
                            std::to_string(i) + " pairs");
    if (i == 0) {
      xs.resize(count, p->first.size());
      ys.resize(count, p->second.size());
    }
    xs.row(i) = p->first;
    ys.row(i) = p->second;
  }
  return {std::move(xs), std::move(ys)};
}

}  // namespace wder::ot
