#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wder/errors.hpp"
#include "wder/random.hpp"

namespace wder::ot {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Random Fourier feature map phi(x) = cos((x / bandwidth) G + b) / sqrt(m).
///
/// Inputs are row vectors of dimension `input_dim()`; outputs are row vectors
/// of dimension `features()`. G and b are drawn once at construction and never
/// change afterwards.
template <typename Scalar>
struct RandomFeatureMap {
  Matrix<Scalar> G;    // d x m, iid N(0, 1)
  RowVector<Scalar> b; // 1 x m, iid U[0, 2pi]
  Scalar bandwidth{1};
  std::uint64_t seed{0};

  Eigen::Index input_dim() const { return G.rows(); }
  Eigen::Index features() const { return G.cols(); }
};

using FeatureMap = RandomFeatureMap<double>;

template <typename Scalar = double>
RandomFeatureMap<Scalar> make_feature_map(Eigen::Index d, Eigen::Index m,
                                          Scalar bandwidth,
                                          std::uint64_t seed) {
  if (d < 1) throw ConfigError("feature map input dimension must be >= 1");
  if (m < 1) throw ConfigError("feature map feature count must be >= 1");
  if (!(bandwidth > Scalar(0)))
    throw ConfigError("feature map bandwidth must be positive");

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  RandomFeatureMap<Scalar> map;
  map.G.resize(d, m);
  map.b.resize(m);
  // column-major fill order is part of the determinism contract
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < d; ++i) map.G(i, j) = Scalar(normal(rng));
  for (Eigen::Index j = 0; j < m; ++j) map.b(j) = Scalar(phase(rng));
  map.bandwidth = bandwidth;
  map.seed = seed;
  return map;
}

/// Pre-activation z = (x / bandwidth) G + b for a batch of row vectors.
template <typename Scalar, typename Derived>
Matrix<Scalar> feature_phase(const RandomFeatureMap<Scalar>& map,
                             const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != map.input_dim())
    throw ShapeError("embed: input dimension " + std::to_string(x.cols()) +
                     " does not match map dimension " +
                     std::to_string(map.input_dim()));
  Matrix<Scalar> z = (x.template cast<Scalar>() / map.bandwidth) * map.G;
  z.rowwise() += map.b;
  return z;
}

/// Embeds a batch (h x d, one sample per row) into h x m features.
template <typename Scalar, typename Derived>
Matrix<Scalar> embed(const RandomFeatureMap<Scalar>& map,
                     const Eigen::MatrixBase<Derived>& x) {
  const Scalar scale = Scalar(1) / std::sqrt(Scalar(map.features()));
  return (feature_phase(map, x).array().cos() * scale).matrix();
}

/// Back-propagates d(loss)/d(phi) (h x m) to d(loss)/d(x) (h x d).
template <typename Scalar, typename Derived, typename GradDerived>
Matrix<Scalar> embed_backward(const RandomFeatureMap<Scalar>& map,
                              const Eigen::MatrixBase<Derived>& x,
                              const Eigen::MatrixBase<GradDerived>& grad_phi) {
  const Scalar scale = Scalar(1) / std::sqrt(Scalar(map.features()));
  Matrix<Scalar> s = feature_phase(map, x).array().sin();
  Matrix<Scalar> dz = -(s.array() * grad_phi.array()).matrix() * scale;
  return dz * map.G.transpose() / map.bandwidth;
}

/// Median pairwise Euclidean distance between rows; a data-driven bandwidth.
/// Returns 1 when fewer than two distinct rows are available.
template <typename Derived>
double median_heuristic_bandwidth(const Eigen::MatrixBase<Derived>& x) {
  std::vector<double> d;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      double v = (x.row(i) - x.row(j)).norm();
      if (v > 0) d.push_back(v);
    }
  if (d.empty()) return 1.0;
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

}  // namespace wder::ot
