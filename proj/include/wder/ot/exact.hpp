#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "wder/errors.hpp"
#include "wder/ot/feature_map.hpp"
#include "wder/ot/transport_lp.hpp"

namespace wder::ot {

/// Finite weighted point cloud; one point per row.
template <typename Scalar>
struct DiscreteMeasure {
  Matrix<Scalar> points;
  std::vector<double> weights;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }

  void validate() const {
    if (static_cast<Eigen::Index>(weights.size()) != points.rows() ||
        points.rows() == 0)
      throw DomainError("discrete measure: need one weight per point");
    double total = 0;
    for (double w : weights) {
      if (!(w >= 0)) throw DomainError("discrete measure: negative weight");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw DomainError("discrete measure: weights sum to " +
                        std::to_string(total));
  }

  bool is_uniform() const {
    const double w = 1.0 / static_cast<double>(weights.size());
    return std::all_of(weights.begin(), weights.end(),
                       [w](double v) { return std::abs(v - w) <= 1e-12; });
  }

  static DiscreteMeasure uniform(Matrix<Scalar> pts) {
    DiscreteMeasure m;
    const auto n = pts.rows();
    m.points = std::move(pts);
    m.weights.assign(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    return m;
  }
};

struct SquaredEuclidean {
  template <typename A, typename B>
  auto operator()(const A& x, const B& y) const {
    return (x - y).squaredNorm();
  }
};

struct Euclidean {
  template <typename A, typename B>
  auto operator()(const A& x, const B& y) const {
    return (x - y).norm();
  }
};

enum class OracleMethod { LinearProgram, Permutation };

inline constexpr Eigen::Index kMaxOracleCouplings = 10000;
inline constexpr Eigen::Index kMaxPermutationPoints = 8;

template <typename Scalar, typename CostFn>
Matrix<Scalar> cost_matrix(const DiscreteMeasure<Scalar>& p,
                           const DiscreteMeasure<Scalar>& q, CostFn&& cost) {
  if (p.dim() != q.dim())
    throw ShapeError("cost matrix: measures have different dimensions");
  Matrix<Scalar> C(p.size(), q.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    for (Eigen::Index j = 0; j < q.size(); ++j)
      C(i, j) = cost(p.points.row(i), q.points.row(j));
  return C;
}

/// Optimal transport plan and cost via the dense simplex. Returns the cost;
/// writes the n x m plan into `plan` when given.
template <typename Scalar>
Scalar solve_transport(const Matrix<Scalar>& C, const std::vector<double>& a,
                       const std::vector<double>& b,
                       Matrix<Scalar>* plan = nullptr) {
  const Eigen::Index n = C.rows(), m = C.cols();
  using Simplex = DenseSimplex<Scalar>;
  typename Simplex::Mat A = Simplex::Mat::Zero(n + m, n * m);
  typename Simplex::Vec rhs(n + m), obj(n * m);
  // variable (i, j) lives at i * m + j
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      A(i, i * m + j) = 1;       // row sums <= a_i
      A(n + j, i * m + j) = -1;  // column sums >= b_j
      obj(i * m + j) = -C(i, j);
    }
    rhs(i) = Scalar(a[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index j = 0; j < m; ++j)
    rhs(n + j) = -Scalar(b[static_cast<std::size_t>(j)]);

  Simplex lp(A, rhs, obj);
  typename Simplex::Vec x;
  if (lp.solve(x) != Simplex::Status::Optimal)
    throw DomainError("transport LP did not reach an optimum");
  Scalar total(0);
  for (Eigen::Index k = 0; k < n * m; ++k) total += -obj(k) * x(k);
  if (plan) *plan = x.reshaped(m, n).transpose();
  return total;
}

/// Exhaustive search over permutation couplings for uniform, equal-size
/// measures.
template <typename Scalar>
Scalar solve_transport_permutation(const Matrix<Scalar>& C) {
  const Eigen::Index n = C.rows();
  if (C.cols() != n || n > kMaxPermutationPoints)
    throw OracleScopeError(
        "permutation oracle needs equal sizes of at most " +
        std::to_string(kMaxPermutationPoints) + " points");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  do {
    Scalar s(0);
    for (Eigen::Index i = 0; i < n; ++i)
      s += C(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / Scalar(n);
}

/// Exact Wasserstein cost between two discrete measures.
template <typename Scalar, typename CostFn = SquaredEuclidean>
Scalar exact_wd_discrete(const DiscreteMeasure<Scalar>& p,
                         const DiscreteMeasure<Scalar>& q, CostFn&& costfn = {},
                         OracleMethod method = OracleMethod::LinearProgram) {
  p.validate();
  q.validate();
  if (p.size() * q.size() > kMaxOracleCouplings)
    throw OracleScopeError("exact_wd_discrete: " +
                           std::to_string(p.size() * q.size()) +
                           " couplings exceed the oracle limit of " +
                           std::to_string(kMaxOracleCouplings));
  const Matrix<Scalar> C = cost_matrix(p, q, costfn);
  if (method == OracleMethod::Permutation) {
    if (p.size() != q.size() || !p.is_uniform() || !q.is_uniform())
      throw OracleScopeError(
          "permutation oracle requires uniform measures of equal size");
    return solve_transport_permutation(C);
  }
  return solve_transport(C, p.weights, q.weights);
}

/// Quantile-coupling oracle for equal-size 1-D samples:
/// mean of |x_(i) - y_(i)|^power after sorting both sets.
inline double exact_wd_1d(std::vector<double> xs, std::vector<double> ys,
                          int power) {
  if (xs.size() != ys.size() || xs.empty())
    throw OracleScopeError("exact_wd_1d: sample counts must be equal and > 0");
  if (power != 1 && power != 2)
    throw DomainError("exact_wd_1d: power must be 1 or 2");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double total = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = std::abs(xs[i] - ys[i]);
    total += power == 1 ? d : d * d;
  }
  return total / static_cast<double>(xs.size());
}

/// Jensen-Shannon divergence in nats between two probability vectors.
template <typename DP, typename DQ>
double js_divergence_categorical(const Eigen::MatrixBase<DP>& p,
                                 const Eigen::MatrixBase<DQ>& q) {
  if (p.size() != q.size() || p.size() == 0)
    throw DomainError("js_divergence: supports differ in size");
  auto check = [](const auto& v, const char* name) {
    double total = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!(v(i) >= 0) || !std::isfinite(double(v(i))))
        throw DomainError(std::string("js_divergence: ") + name +
                          " has a negative or non-finite entry");
      total += double(v(i));
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw DomainError(std::string("js_divergence: ") + name +
                        " does not sum to 1");
  };
  check(p, "p");
  check(q, "q");
  double kl_p = 0, kl_q = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = double(p(i)), qi = double(q(i));
    const double mi = 0.5 * (pi + qi);
    if (pi > 0) kl_p += pi * std::log(pi / mi);
    if (qi > 0) kl_q += qi * std::log(qi / mi);
  }
  return std::clamp(0.5 * kl_p + 0.5 * kl_q, 0.0, std::numbers::ln2);
}

}  // namespace wder::ot
