#include "wder/hrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "wder/errors.hpp"
#include "wder/random.hpp"

namespace wder::hrl {

void RolloutBuffer::clear() {
  steps.clear();
  decisions.clear();
  advantages.clear();
  returns.clear();
  master_advantages.clear();
  master_returns.clear();
}

std::vector<Index> RolloutBuffer::indices_of(int k) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < steps.size(); ++i)
    if (steps[i].subpolicy == k) out.push_back(Index(i));
  return out;
}

GaeResult gae(const VectorXd& rewards, const VectorXd& values, double bootstrap,
              double discount, double lambda) {
  if (rewards.size() != values.size())
    throw ShapeError("gae: rewards and values differ in length");
  const Index n = rewards.size();
  GaeResult out;
  out.advantages.resize(n);
  double next_value = bootstrap;
  double running = 0.0;
  for (Index t = n - 1; t >= 0; --t) {
    const double delta = rewards(t) + discount * next_value - values(t);
    running = delta + discount * lambda * running;
    out.advantages(t) = running;
    next_value = values(t);
  }
  out.returns = out.advantages + values;
  return out;
}

void compute_advantages(RolloutBuffer& buf, const HierAgent& agent,
                        const PpoParams& ppo) {
  const std::size_t n = buf.steps.size();
  buf.advantages.assign(n, 0.0);
  buf.returns.assign(n, 0.0);
  if (n > 0 && !buf.steps.back().done)
    throw UsageError("compute_advantages: last episode has not finished");

  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = buf.steps[i];
    const bool last = s.done || i + 1 == n || buf.steps[i + 1].decision ||
                      buf.steps[i + 1].subpolicy != s.subpolicy;
    if (!last) continue;
    const Index len = Index(i - start + 1);
    VectorXd r(len), v(len);
    for (Index t = 0; t < len; ++t) {
      r(t) = buf.steps[start + std::size_t(t)].reward;
      v(t) = buf.steps[start + std::size_t(t)].value;
    }
    double boot = 0.0;
    if (!s.done) {
      const auto& critic = agent.subs[std::size_t(s.subpolicy)].v;
      boot = critic.forward(s.next_obs.transpose())(0);
    }
    const auto g = gae(r, v, boot, ppo.discount, ppo.gae_lambda);
    for (Index t = 0; t < len; ++t) {
      buf.advantages[start + std::size_t(t)] = g.advantages(t);
      buf.returns[start + std::size_t(t)] = g.returns(t);
    }
    start = i + 1;
  }

  const std::size_t nd = buf.decisions.size();
  buf.master_advantages.assign(nd, 0.0);
  buf.master_returns.assign(nd, 0.0);
  const double md =
      std::pow(ppo.discount, double(agent.spec.subpolicy_duration));
  start = 0;
  for (std::size_t i = 0; i < nd; ++i) {
    if (!buf.decisions[i].done && i + 1 != nd) continue;
    const Index len = Index(i - start + 1);
    VectorXd r(len), v(len);
    for (Index t = 0; t < len; ++t) {
      r(t) = buf.decisions[start + std::size_t(t)].reward;
      v(t) = buf.decisions[start + std::size_t(t)].value;
    }
    const auto g = gae(r, v, 0.0, md, ppo.gae_lambda);
    for (Index t = 0; t < len; ++t) {
      buf.master_advantages[start + std::size_t(t)] = g.advantages(t);
      buf.master_returns[start + std::size_t(t)] = g.returns(t);
    }
    start = i + 1;
  }
}

namespace {

struct Batch {
  MatrixXd obs;
  MatrixXd actions;
  VectorXd old_logp;
  VectorXd adv;
  VectorXd ret;
};

nn::HeadGrad add(nn::HeadGrad a, const nn::HeadGrad& b) {
  a.d_out += b.d_out;
  if (b.d_log_std.size() > 0) {
    if (a.d_log_std.size() == 0) a.d_log_std = VectorXd::Zero(b.d_log_std.size());
    a.d_log_std += b.d_log_std;
  }
  return a;
}

void apply(VectorXd& grad, VectorXd& params, nn::OptState& opt,
           double max_norm, UpdateStats& st) {
  nn::clip_grad_norm(grad, max_norm);
  if (!nn::opt_step(params, grad, opt).applied) ++st.rejected_steps;
}

using ExtraGrad = std::function<VectorXd(const nn::PolicyNet&)>;

UpdateStats ppo_core(nn::PolicyNet& pi, nn::ValueNet& critic,
                     nn::OptState& opt_pi, nn::OptState& opt_v, Batch b,
                     const PpoParams& ppo, const ExtraGrad& extra,
                     std::uint64_t seed) {
  UpdateStats st;
  const Index n = b.obs.rows();
  st.samples = n;
  if (ppo.normalize_advantages && n > 1) {
    const double mean = b.adv.mean();
    const double sd = std::sqrt((b.adv.array() - mean).square().mean());
    b.adv = ((b.adv.array() - mean) / (sd + 1e-8)).matrix();
  }

  const Index chunks = std::min<Index>(ppo.minibatches, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  int count = 0;
  for (int epoch = 0; epoch < ppo.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(derive_seed(seed, {std::uint64_t(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);
    for (Index c = 0; c < chunks; ++c) {
      const Index lo = c * n / chunks, hi = (c + 1) * n / chunks;
      const Index m = hi - lo;
      MatrixXd obs(m, b.obs.cols()), act(m, b.actions.cols());
      VectorXd old_lp(m), adv(m), ret(m);
      for (Index i = 0; i < m; ++i) {
        const Index r = order[std::size_t(lo + i)];
        obs.row(i) = b.obs.row(r);
        act.row(i) = b.actions.row(r);
        old_lp(i) = b.old_logp(r);
        adv(i) = b.adv(r);
        ret(i) = b.ret(r);
      }

      nn::PolicyCache pc;
      const auto head = pi.forward(obs, &pc);
      const VectorXd lp = nn::log_prob(head, act);
      const VectorXd ent = nn::entropy(head);
      VectorXd w(m);
      double surrogate = 0.0;
      for (Index i = 0; i < m; ++i) {
        const double ratio = std::exp(lp(i) - old_lp(i));
        const double clipped =
            std::clamp(ratio, 1.0 - ppo.clip, 1.0 + ppo.clip);
        const double u = ratio * adv(i), v = clipped * adv(i);
        surrogate += std::min(u, v);
        // gradient flows only through the unclipped branch when it is active
        w(i) = u <= v ? -adv(i) * ratio / double(m) : 0.0;
        if (std::abs(ratio - 1.0) > ppo.clip) st.clip_fraction += 1.0;
        st.approx_kl += old_lp(i) - lp(i);
      }
      st.policy_loss += -surrogate / double(m);
      st.entropy += ent.mean();
      nn::HeadGrad hg = nn::log_prob_grad(head, act, w);
      if (ppo.entropy_coef > 0)
        hg = add(std::move(hg),
                 nn::entropy_grad(head, VectorXd::Constant(
                                            m, -ppo.entropy_coef / double(m))));
      VectorXd g = pi.backward(pc, hg);
      if (extra) g += extra(pi);
      apply(g, pi.mutable_params(), opt_pi, ppo.max_grad_norm, st);

      nn::PolicyCache vc;
      const VectorXd v = critic.forward(obs, &vc);
      const VectorXd err = v - ret;
      st.value_loss += 0.5 * err.squaredNorm() / double(m);
      VectorXd gv = critic.backward(vc, err / double(m));
      apply(gv, critic.mutable_params(), opt_v, ppo.max_grad_norm, st);
      ++count;
    }
  }
  if (count > 0) {
    st.policy_loss /= count;
    st.value_loss /= count;
    st.entropy /= count;
    st.approx_kl /= double(count) * double(n) / double(chunks);
    st.clip_fraction /= double(count) * double(n) / double(chunks);
  }
  return st;
}

}  // namespace

UpdateStats ppo_update_subpolicy(int k, HierAgent& agent,
                                 const RolloutBuffer& buf, const PpoParams& ppo,
                                 const WderCache* reg, double alpha,
                                 const WderParams& wder, std::uint64_t seed) {
  if (k < 0 || k >= agent.K())
    throw ConfigError("ppo_update_subpolicy: index out of range");
  if (buf.advantages.size() != buf.steps.size())
    throw UsageError("ppo_update_subpolicy: advantages not computed");
  auto& sp = agent.subs[std::size_t(k)];
  const bool use_reg = reg != nullptr && alpha > 0.0;
  if (use_reg && reg->k != k)
    throw UsageError("ppo_update_subpolicy: regularizer cache is for another subpolicy");

  ExtraGrad extra;
  double wd_sum = 0.0;
  int wd_calls = 0;
  if (use_reg)
    extra = [&](const nn::PolicyNet& pi) {
      const auto e = wder_evaluate(pi, *reg, wder);
      wd_sum += e.wd;
      ++wd_calls;
      return VectorXd(-alpha * e.grad);
    };

  const auto idx = buf.indices_of(k);
  if (idx.empty()) {
    UpdateStats st;
    st.skipped = true;
    if (!use_reg) {
      st.diagnostic = "subpolicy " + std::to_string(k) +
                      " has no steps in this batch; update skipped";
      return st;
    }
    st.diagnostic = "subpolicy " + std::to_string(k) +
                    " unselected; regularizer-only update";
    const int steps = ppo.epochs * ppo.minibatches;
    for (int s = 0; s < steps; ++s) {
      VectorXd g = extra(sp.pi);
      apply(g, sp.pi.mutable_params(), sp.opt_pi, ppo.max_grad_norm, st);
    }
    st.wd_term = wd_sum / double(wd_calls);
    return st;
  }

  Batch b;
  const Index n = Index(idx.size());
  const auto& first = buf.steps[std::size_t(idx[0])];
  b.obs.resize(n, first.obs.size());
  b.actions.resize(n, first.action.size());
  b.old_logp.resize(n);
  b.adv.resize(n);
  b.ret.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto r = std::size_t(idx[std::size_t(i)]);
    const auto& s = buf.steps[r];
    b.obs.row(i) = s.obs.transpose();
    b.actions.row(i) = s.action.transpose();
    b.old_logp(i) = s.log_prob;
    b.adv(i) = buf.advantages[r];
    b.ret(i) = buf.returns[r];
  }
  auto st = ppo_core(sp.pi, sp.v, sp.opt_pi, sp.opt_v, std::move(b), ppo,
                     extra, seed);
  if (wd_calls > 0) st.wd_term = wd_sum / double(wd_calls);
  return st;
}

UpdateStats ppo_update_master(HierAgent& agent, const RolloutBuffer& buf,
                              const PpoParams& ppo, std::uint64_t seed) {
  if (buf.decisions.empty()) {
    UpdateStats st;
    st.skipped = true;
    st.diagnostic = "no master decisions recorded; update skipped";
    return st;
  }
  if (buf.master_advantages.size() != buf.decisions.size())
    throw UsageError("ppo_update_master: advantages not computed");
  const Index n = Index(buf.decisions.size());
  Batch b;
  b.obs.resize(n, buf.decisions[0].obs.size());
  b.actions.resize(n, 1);
  b.old_logp.resize(n);
  b.adv.resize(n);
  b.ret.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& d = buf.decisions[std::size_t(i)];
    b.obs.row(i) = d.obs.transpose();
    b.actions(i, 0) = d.choice;
    b.old_logp(i) = d.log_prob;
    b.adv(i) = buf.master_advantages[std::size_t(i)];
    b.ret(i) = buf.master_returns[std::size_t(i)];
  }
  return ppo_core(agent.master, agent.master_v, agent.opt_master,
                  agent.opt_master_v, std::move(b), ppo, {}, seed);
}

}  // namespace wder::hrl
