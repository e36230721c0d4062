#include "wder/hrl/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "wder/errors.hpp"
#include "wder/random.hpp"

namespace wder::hrl {

std::uint64_t pair_crn_seed(std::uint64_t base, int k, int j) {
  const auto lo = std::uint64_t(std::min(k, j));
  const auto hi = std::uint64_t(std::max(k, j));
  return derive_seed(base, {0xc7, lo, hi});
}

PairFit fit_pair(int k, const nn::PolicyNet& pi_k, int j,
                 const nn::PolicyNet& pi_j, const bem::StateSet& states,
                 const ot::FeatureMap& map, const WderParams& params,
                 std::uint64_t crn_seed, std::uint64_t fit_seed,
                 bem::Coupling coupling) {
  params.validate();
  bem::CrnStream crn{crn_seed, 0};
  const auto pairs =
      bem::sample_action_pairs(pi_k, pi_j, states, params.actions, crn, coupling);
  const MatrixXd in_k =
      bem::embedding_inputs(pairs.head, pairs.action_dim, pairs.actions_k);
  const MatrixXd in_j =
      bem::embedding_inputs(pairs.head, pairs.action_dim, pairs.actions_l);
  const auto phi_k = bem::pushforward(map, in_k, k, states.id);
  const auto phi_j = bem::pushforward(map, in_j, j, states.id);

  ot::AlignedSampler<double> sampler(phi_k.features, phi_j.features);
  PairFit out;
  WderCache& c = out.cache;
  c.pot = ot::fit_potentials_embedded(sampler, map.features(), params.ot,
                                      fit_seed);

  Rng rng(derive_seed(fit_seed, {0xe7}));
  std::uniform_int_distribution<Index> pick(0, pairs.rows() - 1);
  const Index C = params.ot.eval_samples;
  c.obs.resize(C, pairs.obs.cols());
  c.noise.resize(C, pairs.noise_k.cols());
  c.phi_other.resize(C, map.features());
  MatrixXd phi_eval(C, map.features());
  for (Index i = 0; i < C; ++i) {
    const Index r = pick(rng);
    c.obs.row(i) = pairs.obs.row(r);
    c.noise.row(i) = pairs.noise_k.row(r);
    c.phi_other.row(i) = phi_j.features.row(r);
    phi_eval.row(i) = phi_k.features.row(r);
  }
  c.k = k;
  c.j = j;
  c.head = pairs.head;
  c.action_dim = pairs.action_dim;
  c.map = map;
  c.param_count = pi_k.param_count();
  c.state_set_id = states.id;
  out.wd = ot::estimate_wd(c.pot, phi_eval, c.phi_other, params.ot);
  return out;
}

WdMinResult wd_min(int k, const HierAgent& agent, const bem::StateSet& states,
                   const WderParams& params, std::uint64_t seed) {
  const int K = agent.K();
  if (K < 2) throw ConfigError("wd_min: needs at least 2 subpolicies");
  if (k < 0 || k >= K) throw ConfigError("wd_min: subpolicy index out of range");
  WdMinResult out;
  out.distances.assign(std::size_t(K), std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < K; ++j) {
    if (j == k) continue;
    auto fit = fit_pair(k, agent.subs[std::size_t(k)].pi, j,
                        agent.subs[std::size_t(j)].pi, states, agent.map,
                        params, pair_crn_seed(seed, k, j),
                        derive_seed(seed, {0xf1, std::uint64_t(k),
                                           std::uint64_t(j)}));
    out.distances[std::size_t(j)] = fit.wd;
    out.clamp_events += fit.cache.pot.clamp_events;
    if (out.argmin < 0 || fit.wd < out.value) {
      out.value = fit.wd;
      out.argmin = j;
      out.cache = std::move(fit.cache);
    }
  }
  return out;
}

WderEval wder_evaluate(const nn::PolicyNet& pi_k, const WderCache& cache,
                       const WderParams& params) {
  if (!cache.valid() || cache.param_count != pi_k.param_count() ||
      cache.obs.cols() != pi_k.obs_dim() || cache.head != pi_k.head())
    throw UsageError("wder: cache does not belong to this policy");

  nn::PolicyCache pc;
  const nn::HeadOutput head = pi_k.forward(cache.obs, &pc);
  const MatrixXd actions = nn::sample(head, cache.noise);
  const MatrixXd inputs =
      bem::embedding_inputs(cache.head, cache.action_dim, actions);
  const MatrixXd phi = ot::embed(cache.map, inputs);

  WderEval out;
  out.wd = ot::estimate_wd(cache.pot, phi, cache.phi_other, params.ot);
  const MatrixXd g_phi =
      ot::estimate_wd_grad_x(cache.pot, phi, cache.phi_other, params.ot);
  const MatrixXd g_in = ot::embed_backward(cache.map, inputs, g_phi);

  nn::HeadGrad hg;
  if (cache.head == nn::HeadType::Gaussian) {
    // a = mean + exp(log_std) * eps
    hg.d_out = g_in;
    const Eigen::ArrayXd sd = head.log_std.array().exp();
    hg.d_log_std = VectorXd::Zero(sd.size());
    for (Index i = 0; i < g_in.rows(); ++i)
      hg.d_log_std.array() +=
          g_in.row(i).transpose().array() * sd *
          cache.noise.row(i).transpose().array();
  } else {
    // straight-through: hard one-hot forward, tempered softmax backward
    const double tau = params.st_temperature;
    const MatrixXd p = nn::softmax(head.logits / tau);
    hg.d_out.resize(p.rows(), p.cols());
    for (Index i = 0; i < p.rows(); ++i) {
      const double pg = p.row(i).dot(g_in.row(i));
      hg.d_out.row(i) =
          (p.row(i).array() * (g_in.row(i).array() - pg)).matrix() / tau;
    }
  }
  out.grad = pi_k.backward(pc, hg);
  return out;
}

VectorXd wder_gradient(const nn::PolicyNet& pi_k, const WderCache& cache,
                       double alpha, const WderParams& params) {
  if (alpha == 0.0) return VectorXd::Zero(pi_k.param_count());
  return -alpha * wder_evaluate(pi_k, cache, params).grad;
}

}  // namespace wder::hrl
