#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace wder::ot {

/// Dense two-phase simplex for  max c'x  s.t.  Ax <= b, x >= 0.
/// Bland-style tie breaking on variable ids keeps degenerate transport
/// problems from cycling.
template <typename Scalar>
class DenseSimplex {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  enum class Status { Optimal, Infeasible, Unbounded };

  DenseSimplex(const Mat& A, const Vec& b, const Vec& c, Scalar eps = 1e-10)
      : m_(static_cast<int>(b.size())), n_(static_cast<int>(c.size())),
        eps_(eps), N_(n_ + 1), B_(m_), D_(Mat::Zero(m_ + 2, n_ + 2)) {
    D_.topLeftCorner(m_, n_) = A;
    for (int i = 0; i < m_; ++i) {
      B_[i] = n_ + i;
      D_(i, n_) = -1;
      D_(i, n_ + 1) = b(i);
    }
    for (int j = 0; j < n_; ++j) {
      N_[j] = j;
      D_(m_, j) = -c(j);
    }
    N_[n_] = -1;
    D_(m_ + 1, n_) = 1;
  }

  Status solve(Vec& x) {
    int r = 0;
    for (int i = 1; i < m_; ++i)
      if (D_(i, n_ + 1) < D_(r, n_ + 1)) r = i;
    if (m_ > 0 && D_(r, n_ + 1) < -eps_) {
      pivot(r, n_);
      if (!simplex(2) || D_(m_ + 1, n_ + 1) < -eps_) return Status::Infeasible;
      for (int i = 0; i < m_; ++i)
        if (B_[i] == -1) {
          int s = 0;
          for (int j = 1; j <= n_; ++j)
            if (better(D_(i, j), N_[j], D_(i, s), N_[s])) s = j;
          pivot(i, s);
        }
    }
    const bool ok = simplex(1);
    x = Vec::Zero(n_);
    for (int i = 0; i < m_; ++i)
      if (B_[i] >= 0 && B_[i] < n_) x(B_[i]) = D_(i, n_ + 1);
    return ok ? Status::Optimal : Status::Unbounded;
  }

 private:
  static bool better(Scalar a, int ia, Scalar b, int ib) {
    return a < b || (a == b && ia < ib);
  }

  void pivot(int r, int s) {
    const Scalar inv = Scalar(1) / D_(r, s);
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r || std::abs(D_(i, s)) <= eps_) continue;
      const Scalar inv2 = D_(i, s) * inv;
      D_.row(i) -= D_.row(r) * inv2;
      D_(i, s) = D_(r, s) * inv2;
    }
    for (int j = 0; j < n_ + 2; ++j)
      if (j != s) D_(r, j) *= inv;
    for (int i = 0; i < m_ + 2; ++i)
      if (i != r) D_(i, s) *= -inv;
    D_(r, s) = inv;
    std::swap(B_[r], N_[s]);
  }

  bool simplex(int phase) {
    const int x = m_ + phase - 1;
    for (;;) {
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        if (N_[j] == -phase) continue;
        if (s == -1 || better(D_(x, j), N_[j], D_(x, s), N_[s])) s = j;
      }
      if (D_(x, s) >= -eps_) return true;
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        if (D_(i, s) <= eps_) continue;
        if (r == -1) {
          r = i;
          continue;
        }
        const Scalar lhs = D_(i, n_ + 1) / D_(i, s);
        const Scalar rhs = D_(r, n_ + 1) / D_(r, s);
        if (lhs < rhs || (lhs == rhs && B_[i] < B_[r])) r = i;
      }
      if (r == -1) return false;
      pivot(r, s);
    }
  }

  int m_, n_;
  Scalar eps_;
  std::vector<int> N_, B_;
  Mat D_;
};

}  // namespace wder::ot
