#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "wder/bem/behavior.hpp"
#include "wder/hrl/agent.hpp"

namespace wder::hrl {

/// Everything needed to re-evaluate one ordered distance WD(pi_k, pi_j) at
/// new parameters of pi_k: the evaluation rows, the draws pi_k consumed,
/// pi_j's embedded actions and the fitted potentials, all held fixed.
struct WderCache {
  int k = -1;
  int j = -1;
  nn::HeadType head = nn::HeadType::Gaussian;
  int action_dim = 0;
  MatrixXd obs;        // C x obs_dim
  MatrixXd noise;      // C x (action_dim or 1)
  MatrixXd phi_other;  // C x m
  ot::DualPotentials<double> pot;
  ot::FeatureMap map;
  Index param_count = 0;
  std::uint64_t state_set_id = 0;

  bool valid() const { return k >= 0 && j >= 0; }
};

/// Fits potentials between pi_k and pi_j on CRN-coupled behaviour batches
/// and reports the estimate at the fit parameters.
struct PairFit {
  double wd = 0.0;
  WderCache cache;
};

PairFit fit_pair(int k, const nn::PolicyNet& pi_k, int j,
                 const nn::PolicyNet& pi_j, const bem::StateSet& states,
                 const ot::FeatureMap& map, const WderParams& params,
                 std::uint64_t crn_seed, std::uint64_t fit_seed,
                 bem::Coupling coupling = bem::Coupling::Common);

struct WdMinResult {
  double value = 0.0;
  int argmin = -1;
  /// WD(k, j) for every j; NaN at j = k.
  std::vector<double> distances;
  WderCache cache;
  /// Clamp events summed over every pair fit.
  std::size_t clamp_events = 0;
};

/// Seed of the common-random-number stream for the unordered pair {k, j}.
std::uint64_t pair_crn_seed(std::uint64_t base, int k, int j);

/// Minimum over j != k of WD(pi_k, pi_j); ties go to the lowest index.
WdMinResult wd_min(int k, const HierAgent& agent, const bem::StateSet& states,
                   const WderParams& params, std::uint64_t seed);

struct WderEval {
  double wd = 0.0;
  VectorXd grad;  // d(wd)/d(theta_k)
};

/// Rebuilds pi_k's samples from the cached draws at the current parameters
/// and differentiates the empirical dual objective through them with the
/// potentials and pi_j's features fixed.
WderEval wder_evaluate(const nn::PolicyNet& pi_k, const WderCache& cache,
                       const WderParams& params);

/// Gradient of the loss term -alpha * WD_min with respect to theta_k.
VectorXd wder_gradient(const nn::PolicyNet& pi_k, const WderCache& cache,
                       double alpha, const WderParams& params);

}  // namespace wder::hrl
