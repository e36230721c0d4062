#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "wder/errors.hpp"
#include "wder/hrl/agent.hpp"
#include "wder/hrl/ppo.hpp"
#include "wder/hrl/regularizer.hpp"
#include "wder/ot/exact.hpp"

using namespace wder;
using namespace wder::hrl;

namespace {

AgentSpec gaussian_spec(int K, int act = 2) {
  AgentSpec s;
  s.obs_dim = 3;
  s.head = nn::HeadType::Gaussian;
  s.action_dim = act;
  s.K = K;
  s.hidden = {16, 16};
  s.init_log_std = -0.5;
  return s;
}

WderParams small_wder() {
  WderParams w;
  w.states = 8;
  w.actions = 4;
  w.features = 64;
  w.ot.eval_samples = 64;
  w.ot.rounds = 300;
  return w;
}

bem::StateSet states(Index T, std::uint64_t seed, int dim = 3) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  MatrixXd s = MatrixXd::NullaryExpr(T, dim, [&] { return u(rng); });
  return {s, "test", seed};
}

void shift_mean(nn::PolicyNet& pi, const VectorXd& delta) {
  const Index body = pi.layout().param_count();
  pi.mutable_params().segment(body - delta.size(), delta.size()) += delta;
}

// Single-step categorical episodes: each step is its own segment and episode.
RolloutBuffer bandit_batch(const HierAgent& agent, int k, int n, Rng& rng) {
  RolloutBuffer buf;
  const VectorXd obs = VectorXd::Constant(agent.spec.obs_dim, 0.5);
  const auto& sp = agent.subs[std::size_t(k)];
  const auto head = sp.pi.forward(obs.transpose());
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < n; ++i) {
    MatrixXd noise(1, 1);
    noise << u(rng);
    const MatrixXd a = nn::sample(head, noise);
    StepRecord s;
    s.obs = obs;
    s.action = a.row(0).transpose();
    s.reward = a(0, 0) == 1 ? 1.0 : 0.0;
    s.next_obs = obs;
    s.value = sp.v.forward(obs.transpose())(0);
    s.log_prob = nn::log_prob(head, a)(0);
    s.subpolicy = k;
    s.done = true;
    s.decision = true;
    buf.steps.push_back(s);
  }
  return buf;
}

}  // namespace

TEST(Gae, ThreeStepHandTrace) {
  VectorXd r(3), v(3);
  r << 1.0, 0.0, 2.0;
  v << 0.5, 0.4, 0.3;
  const double g = 0.9, l = 0.8, boot = 0.2;
  const double d0 = 1.0 + g * 0.4 - 0.5;
  const double d1 = 0.0 + g * 0.3 - 0.4;
  const double d2 = 2.0 + g * boot - 0.3;
  const double gl = g * l;
  const auto out = gae(r, v, boot, g, l);
  EXPECT_NEAR(out.advantages(0), d0 + gl * d1 + gl * gl * d2, 1e-14);
  EXPECT_NEAR(out.advantages(1), d1 + gl * d2, 1e-14);
  EXPECT_NEAR(out.advantages(2), d2, 1e-14);
  EXPECT_NEAR(out.returns(1), out.advantages(1) + 0.4, 1e-14);
  EXPECT_THROW(gae(r, VectorXd::Zero(2), 0, g, l), ShapeError);
}

TEST(Gae, LambdaOneGivesDiscountedReturn) {
  VectorXd r(3), v(3);
  r << 1, 2, 3;
  v << 9, -4, 7;
  const auto out = gae(r, v, 0.0, 0.5, 1.0);
  EXPECT_NEAR(out.returns(0), 1 + 0.5 * 2 + 0.25 * 3, 1e-14);
}

TEST(Advantages, SegmentsBootstrapFromActingCritic) {
  PpoParams ppo;
  HierAgent agent(gaussian_spec(2), ppo, small_wder(), 1);
  RolloutBuffer buf;
  const VectorXd o0 = VectorXd::Constant(3, 0.1), o1 = VectorXd::Constant(3, 0.7);
  auto push = [&](int k, double rew, const VectorXd& next, bool dec, bool done) {
    StepRecord s;
    s.obs = o0;
    s.action = VectorXd::Zero(2);
    s.reward = rew;
    s.next_obs = next;
    s.value = 0.25;
    s.subpolicy = k;
    s.decision = dec;
    s.done = done;
    buf.steps.push_back(s);
  };
  push(0, 1.0, o0, true, false);
  push(0, 0.0, o1, false, false);  // segment ends, episode continues
  push(1, 2.0, o1, true, true);
  compute_advantages(buf, agent, ppo);
  VectorXd r(2), v(2);
  r << 1.0, 0.0;
  v << 0.25, 0.25;
  const double boot = agent.subs[0].v.forward(o1.transpose())(0);
  const auto ref = gae(r, v, boot, ppo.discount, ppo.gae_lambda);
  EXPECT_NEAR(buf.advantages[0], ref.advantages(0), 1e-14);
  EXPECT_NEAR(buf.advantages[1], ref.advantages(1), 1e-14);
  EXPECT_NEAR(buf.advantages[2], 2.0 - 0.25, 1e-14);

  buf.steps.back().done = false;
  EXPECT_THROW(compute_advantages(buf, agent, ppo), UsageError);
}

TEST(WdMin, TwoSubpoliciesPickTheOther) {
  PpoParams ppo;
  const auto w = small_wder();
  HierAgent agent(gaussian_spec(2), ppo, w, 3);
  const auto r = wd_min(0, agent, states(8, 1), w, 5);
  EXPECT_EQ(r.argmin, 1);
  EXPECT_TRUE(std::isnan(r.distances[0]));
  EXPECT_EQ(r.value, r.distances[1]);
  EXPECT_EQ(r.cache.k, 0);
  EXPECT_EQ(r.cache.j, 1);
}

TEST(WdMin, IdenticalPoliciesWithinSmoothingBias) {
  PpoParams ppo;
  const auto w = small_wder();
  HierAgent agent(gaussian_spec(2), ppo, w, 3);
  agent.subs[1].pi = agent.subs[0].pi;
  const auto r = wd_min(0, agent, states(8, 1), w, 5);
  EXPECT_LE(std::abs(r.value), w.ot.smoothing + 1e-9);
}

TEST(WdMin, ThreeSubpoliciesPickTheTwin) {
  PpoParams ppo;
  const auto w = small_wder();
  HierAgent agent(gaussian_spec(3), ppo, w, 3);
  agent.subs[1].pi = agent.subs[0].pi;
  agent.subs[2].pi = agent.subs[0].pi;
  shift_mean(agent.subs[2].pi, VectorXd::Constant(2, 1.5));
  const auto r = wd_min(0, agent, states(8, 1), w, 5);
  EXPECT_EQ(r.argmin, 1);
  EXPECT_LT(r.distances[1], r.distances[2]);
}

TEST(WdMin, NeedsTwoSubpolicies) {
  PpoParams ppo;
  const auto w = small_wder();
  HierAgent agent(gaussian_spec(1), ppo, w, 3);
  EXPECT_THROW(wd_min(0, agent, states(8, 1), w, 5), ConfigError);
}

TEST(WderGradient, MatchesFiniteDifferences) {
  PpoParams ppo;
  auto w = small_wder();
  w.ot.smoothing = 0.1;
  HierAgent agent(gaussian_spec(2), ppo, w, 4);
  shift_mean(agent.subs[1].pi, VectorXd::Constant(2, 0.3));
  const auto r = wd_min(0, agent, states(8, 2), w, 6);
  const auto& pi = agent.subs[0].pi;
  const double alpha = 0.5;
  const VectorXd g = wder_gradient(pi, r.cache, alpha, w);
  // the loss term is -alpha * WD
  const double h = 1e-5;
  for (Index i = 0; i < pi.param_count(); ++i) {
    nn::PolicyNet p = pi, m = pi;
    p.mutable_params()(i) += h;
    m.mutable_params()(i) -= h;
    const double fd = -alpha *
                      (wder_evaluate(p, r.cache, w).wd -
                       wder_evaluate(m, r.cache, w).wd) / (2 * h);
    EXPECT_NEAR(g(i), fd, std::max(1e-3 * std::max(std::abs(g(i)), std::abs(fd)), 1e-8))
        << "param " << i;
  }
}

TEST(WderGradient, ZeroAlphaAndForeignCache) {
  PpoParams ppo;
  const auto w = small_wder();
  HierAgent agent(gaussian_spec(2), ppo, w, 4);
  const auto r = wd_min(0, agent, states(8, 2), w, 6);
  EXPECT_EQ(wder_gradient(agent.subs[0].pi, r.cache, 0.0, w).norm(), 0.0);
  HierAgent other(gaussian_spec(2, 1), ppo, w, 4);
  EXPECT_THROW(wder_evaluate(other.subs[0].pi, r.cache, w), UsageError);
  EXPECT_THROW(wder_evaluate(agent.subs[0].pi, WderCache{}, w), UsageError);
}

TEST(WderGradient, StraightThroughCategorical) {
  PpoParams ppo;
  const auto w = small_wder();
  AgentSpec s = gaussian_spec(2, 5);
  s.head = nn::HeadType::Categorical;
  HierAgent agent(s, ppo, w, 4);
  // near-uniform twins draw the same index from every shared uniform, so
  // each pair coincides and the squared cost is stationary there
  auto r = wd_min(0, agent, states(8, 2), w, 6);
  EXPECT_EQ(wder_gradient(agent.subs[0].pi, r.cache, 0.5, w).norm(), 0.0);

  VectorXd shift(5);
  shift << 1.0, 0.0, 0.0, 0.0, -1.0;
  shift_mean(agent.subs[1].pi, shift);
  r = wd_min(0, agent, states(8, 2), w, 6);
  const VectorXd g = wder_gradient(agent.subs[0].pi, r.cache, 0.5, w);
  EXPECT_TRUE(g.allFinite());
  EXPECT_GT(g.norm(), 0.0);
}

TEST(WderGradient, RegularizerSeparatesOneDimensionalGaussians) {
  PpoParams ppo;
  auto w = small_wder();
  HierAgent agent(gaussian_spec(2, 1), ppo, w, 8);
  agent.subs[1].pi = agent.subs[0].pi;
  shift_mean(agent.subs[1].pi, VectorXd::Constant(1, 0.01));
  const auto probe = states(10, 99);
  auto distance = [&] {
    // mean over probe states of the 1-D W1 between the two action laws
    double total = 0;
    const int n = 2000;
    Rng rng(1);
    std::normal_distribution<double> z(0, 1);
    for (Index t = 0; t < probe.size(); ++t) {
      std::vector<double> xs(n), ys(n);
      const auto h0 = agent.subs[0].pi.forward(probe.states.row(t));
      const auto h1 = agent.subs[1].pi.forward(probe.states.row(t));
      for (int i = 0; i < n; ++i) {
        const double e = z(rng);
        xs[i] = h0.mean(0, 0) + std::exp(h0.log_std(0)) * e;
        ys[i] = h1.mean(0, 0) + std::exp(h1.log_std(0)) * e;
      }
      total += ot::exact_wd_1d(xs, ys, 1);
    }
    return total / double(probe.size());
  };
  const double before = distance();
  auto opt = nn::OptState::for_params(agent.subs[0].pi.param_count(), 3e-3);
  for (int step = 0; step < 50; ++step) {
    const auto r = wd_min(0, agent, states(8, 1000 + step), w, step);
    const VectorXd g = wder_gradient(agent.subs[0].pi, r.cache, 1.0, w);
    nn::opt_step(agent.subs[0].pi.mutable_params(), g, opt);
  }
  EXPECT_GT(distance(), before);
}

TEST(Ppo, ZeroAlphaMatchesNoRegularizer) {
  PpoParams ppo;
  const auto w = small_wder();
  AgentSpec s = gaussian_spec(2, 5);
  s.head = nn::HeadType::Categorical;
  s.obs_dim = 2;
  HierAgent a(s, ppo, w, 2), b = a;
  Rng rng(3);
  auto buf = bandit_batch(a, 0, 40, rng);
  compute_advantages(buf, a, ppo);
  const auto r = wd_min(0, a, states(8, 1, 2), w, 1);
  ppo_update_subpolicy(0, a, buf, ppo, &r.cache, 0.0, w, 7);
  ppo_update_subpolicy(0, b, buf, ppo, nullptr, 0.0, w, 7);
  EXPECT_EQ(a.subs[0].pi.params(), b.subs[0].pi.params());
  EXPECT_EQ(a.subs[0].v.params(), b.subs[0].v.params());
}

TEST(Ppo, BanditLearnsRewardingArm) {
  PpoParams ppo;
  ppo.policy_lr = 3e-3;
  const auto w = small_wder();
  AgentSpec s = gaussian_spec(2, 2);
  s.head = nn::HeadType::Categorical;
  s.obs_dim = 2;
  HierAgent agent(s, ppo, w, 5);
  const MatrixXd obs = MatrixXd::Constant(1, 2, 0.5);
  const double p0 = nn::softmax(agent.subs[0].pi.forward(obs).logits)(0, 1);
  Rng rng(9);
  for (int it = 0; it < 20; ++it) {
    auto buf = bandit_batch(agent, 0, 64, rng);
    compute_advantages(buf, agent, ppo);
    ppo_update_subpolicy(0, agent, buf, ppo, nullptr, 0.0, w, it);
  }
  const double p1 = nn::softmax(agent.subs[0].pi.forward(obs).logits)(0, 1);
  EXPECT_GT(p1, p0);
  EXPECT_GT(p1, 0.8);
}

TEST(Ppo, UnselectedSubpolicyMovesOnlyWithRegularizer) {
  PpoParams ppo;
  const auto w = small_wder();
  AgentSpec s = gaussian_spec(2, 5);
  s.head = nn::HeadType::Categorical;
  s.obs_dim = 2;
  HierAgent agent(s, ppo, w, 2);
  VectorXd shift(5);
  shift << 1.0, 0.0, 0.0, 0.0, -1.0;
  shift_mean(agent.subs[0].pi, shift);
  Rng rng(3);
  auto buf = bandit_batch(agent, 0, 16, rng);
  compute_advantages(buf, agent, ppo);
  const VectorXd before = agent.subs[1].pi.params();
  auto st = ppo_update_subpolicy(1, agent, buf, ppo, nullptr, 0.5, w, 1);
  EXPECT_TRUE(st.skipped);
  EXPECT_EQ(agent.subs[1].pi.params(), before);

  const auto r = wd_min(1, agent, states(8, 1, 2), w, 1);
  st = ppo_update_subpolicy(1, agent, buf, ppo, &r.cache, 0.5, w, 1);
  EXPECT_TRUE(st.skipped);
  EXPECT_NE(agent.subs[1].pi.params(), before);
  EXPECT_TRUE(std::isfinite(st.wd_term));
  EXPECT_THROW(ppo_update_subpolicy(0, agent, buf, ppo, &r.cache, 0.5, w, 1),
               UsageError);
}

TEST(Master, PositiveAdvantageRaisesChoice) {
  PpoParams ppo;
  ppo.normalize_advantages = false;
  const auto w = small_wder();
  HierAgent agent(gaussian_spec(3), ppo, w, 6);
  const VectorXd obs = VectorXd::Constant(3, 0.2);
  auto probs = [&] { return nn::softmax(agent.master.forward(obs.transpose()).logits); };
  const double before = probs()(0, 2);
  RolloutBuffer buf;
  const auto head = agent.master.forward(obs.transpose());
  MatrixXd a(1, 1);
  a << 2;
  for (int i = 0; i < 8; ++i) {
    DecisionRecord d;
    d.obs = obs;
    d.choice = 2;
    d.reward = 1.0;
    d.value = 0.0;
    d.log_prob = nn::log_prob(head, a)(0);
    d.steps = 10;
    d.done = true;
    buf.decisions.push_back(d);
  }
  compute_advantages(buf, agent, ppo);
  ppo_update_master(agent, buf, ppo, 0);
  EXPECT_GT(probs()(0, 2), before);
}

TEST(Master, UpdateIgnoresAlpha) {
  PpoParams ppo;
  const auto w = small_wder();
  AgentSpec s0 = gaussian_spec(2), s1 = gaussian_spec(2);
  s1.alpha = 0.5;
  HierAgent a(s0, ppo, w, 6), b(s1, ppo, w, 6);
  RolloutBuffer buf;
  for (int i = 0; i < 6; ++i) {
    DecisionRecord d;
    d.obs = VectorXd::Constant(3, 0.1 * i);
    d.choice = i % 2;
    d.reward = double(i % 3);
    d.done = i == 5;
    buf.decisions.push_back(d);
  }
  compute_advantages(buf, a, ppo);
  ppo_update_master(a, buf, ppo, 4);
  ppo_update_master(b, buf, ppo, 4);
  EXPECT_EQ(a.master.params(), b.master.params());
  EXPECT_TRUE(ppo_update_master(a, RolloutBuffer{}, ppo, 0).skipped);
}

TEST(Master, LearnsToPickTheRewardingSubpolicy) {
  PpoParams ppo;
  ppo.policy_lr = 1e-3;
  const auto w = small_wder();
  HierAgent agent(gaussian_spec(2), ppo, w, 7);
  const VectorXd obs = VectorXd::Constant(3, 0.3);
  Rng rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int it = 0; it < 300; ++it) {
    RolloutBuffer buf;
    const auto head = agent.master.forward(obs.transpose());
    for (int i = 0; i < 16; ++i) {
      MatrixXd noise(1, 1);
      noise << u(rng);
      const MatrixXd a = nn::sample(head, noise);
      DecisionRecord d;
      d.obs = obs;
      d.choice = int(a(0, 0));
      d.reward = d.choice == 1 ? 1.0 : 0.0;
      d.value = agent.master_v.forward(obs.transpose())(0);
      d.log_prob = nn::log_prob(head, a)(0);
      d.done = true;
      buf.decisions.push_back(d);
    }
    compute_advantages(buf, agent, ppo);
    ppo_update_master(agent, buf, ppo, std::uint64_t(it));
  }
  const auto p = nn::softmax(agent.master.forward(obs.transpose()).logits);
  EXPECT_GT(p(0, 1), 0.95);
}
