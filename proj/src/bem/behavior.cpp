#include "wder/bem/behavior.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "wder/errors.hpp"
#include "wder/random.hpp"

namespace wder::bem {

StateSet collect_rollout_states(const std::vector<MatrixXd>& sources, Index T,
                                std::uint64_t seed, const std::string& source) {
  if (T < 1) throw ConfigError("collect_rollout_states: T must be >= 1");
  if (sources.empty())
    throw CollectionError("collect_rollout_states: no trajectories given");
  Index total = 0, dim = -1;
  for (const auto& s : sources) {
    total += s.rows();
    if (s.rows() == 0) continue;
    if (dim >= 0 && s.cols() != dim)
      throw ShapeError("collect_rollout_states: observation dims differ");
    dim = s.cols();
  }
  if (total < T)
    throw CollectionError("collect_rollout_states: need " + std::to_string(T) +
                          " states, " + std::to_string(total) + " available");

  // quotas: round-robin one state at a time over sources with capacity left
  const std::size_t n = sources.size();
  std::vector<Index> take(n, 0);
  for (Index got = 0; got < T;)
    for (std::size_t s = 0; s < n && got < T; ++s)
      if (take[s] < sources[s].rows()) {
        ++take[s];
        ++got;
      }

  Rng rng(seed);
  MatrixXd rows(T, dim);
  Index r = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const Index avail = sources[s].rows();
    std::vector<Index> idx(static_cast<std::size_t>(avail));
    std::iota(idx.begin(), idx.end(), Index{0});
    // partial Fisher-Yates
    for (Index i = 0; i < take[s]; ++i) {
      std::uniform_int_distribution<Index> d(i, avail - 1);
      std::swap(idx[std::size_t(i)], idx[std::size_t(d(rng))]);
    }
    for (Index i = 0; i < take[s]; ++i)
      rows.row(r++) = sources[s].row(idx[std::size_t(i)]);
  }

  std::vector<Index> order(static_cast<std::size_t>(T));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  StateSet out;
  out.states.resize(T, dim);
  for (Index i = 0; i < T; ++i) out.states.row(i) = rows.row(order[std::size_t(i)]);
  out.source = source;
  out.id = seed;
  return out;
}

StateSet collect_rollout_states(const MatrixXd& from_k, const MatrixXd& from_l,
                                Index T, std::uint64_t seed,
                                const std::string& source) {
  return collect_rollout_states(std::vector<MatrixXd>{from_k, from_l}, T, seed,
                                source);
}

MatrixXd CrnStream::normal(Index rows, Index cols) {
  Rng rng(derive_seed(seed, {draws++, 1}));
  std::normal_distribution<double> n;
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

MatrixXd CrnStream::uniform(Index rows, Index cols) {
  Rng rng(derive_seed(seed, {draws++, 2}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

ActionPairs sample_action_pairs(const nn::PolicyNet& pi_k,
                                const nn::PolicyNet& pi_l,
                                const StateSet& states, int B, CrnStream& crn,
                                Coupling coupling) {
  if (B < 1) throw ConfigError("sample_action_pairs: B must be >= 1");
  if (pi_k.head() != pi_l.head() || pi_k.action_dim() != pi_l.action_dim() ||
      pi_k.obs_dim() != pi_l.obs_dim())
    throw ConfigError("sample_action_pairs: policies do not share spaces");
  if (states.size() < 1 || states.states.cols() != pi_k.obs_dim())
    throw ShapeError("sample_action_pairs: state set does not match policies");

  ActionPairs out;
  out.head = pi_k.head();
  out.action_dim = pi_k.action_dim();
  out.state_set_id = states.id;
  const Index h = states.size() * B;
  out.obs.resize(h, states.states.cols());
  for (Index t = 0; t < states.size(); ++t)
    out.obs.middleRows(t * B, B).rowwise() = states.states.row(t);

  const Index ncol = out.head == nn::HeadType::Gaussian ? out.action_dim : 1;
  auto draw = [&] {
    return out.head == nn::HeadType::Gaussian ? crn.normal(h, ncol)
                                              : crn.uniform(h, ncol);
  };
  out.noise_k = draw();
  out.noise_l = coupling == Coupling::Common ? out.noise_k : draw();
  out.actions_k = nn::sample(pi_k.forward(out.obs), out.noise_k);
  out.actions_l = nn::sample(pi_l.forward(out.obs), out.noise_l);
  return out;
}

int embedding_input_dim(const nn::PolicyNet& pi) { return pi.action_dim(); }

MatrixXd embedding_inputs(nn::HeadType head, int action_dim,
                          const MatrixXd& actions) {
  if (head == nn::HeadType::Gaussian) return actions;
  MatrixXd onehot = MatrixXd::Zero(actions.rows(), action_dim);
  for (Index i = 0; i < actions.rows(); ++i) {
    const auto a = static_cast<Index>(actions(i, 0));
    if (a < 0 || a >= action_dim)
      throw DomainError("embedding_inputs: action index out of range");
    onehot(i, a) = 1.0;
  }
  return onehot;
}

PushforwardBatch pushforward(const ot::FeatureMap& map, const MatrixXd& inputs,
                             int policy_id, std::uint64_t state_set_id) {
  return {ot::embed(map, inputs), policy_id, state_set_id};
}

}  // namespace wder::bem
