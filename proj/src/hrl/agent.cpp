#include "wder/hrl/agent.hpp"

#include "wder/errors.hpp"
#include "wder/random.hpp"

namespace wder::hrl {

void PpoParams::validate() const {
  if (!(clip > 0)) throw ConfigError("ppo: clip must be > 0");
  if (epochs < 1) throw ConfigError("ppo: epochs must be >= 1");
  if (minibatches < 1) throw ConfigError("ppo: minibatches must be >= 1");
  if (!(discount > 0 && discount <= 1))
    throw ConfigError("ppo: discount must be in (0, 1]");
  if (!(gae_lambda >= 0 && gae_lambda <= 1))
    throw ConfigError("ppo: gae_lambda must be in [0, 1]");
  if (!(entropy_coef >= 0)) throw ConfigError("ppo: entropy_coef must be >= 0");
  if (!(policy_lr > 0) || !(value_lr > 0))
    throw ConfigError("ppo: learning rates must be > 0");
}

void WderParams::validate() const {
  ot.validate();
  if (states < 1) throw ConfigError("wder: states (T) must be >= 1");
  if (actions < 1) throw ConfigError("wder: actions (B) must be >= 1");
  if (features < 1) throw ConfigError("wder: features must be >= 1");
  if (!(bandwidth > 0)) throw ConfigError("wder: bandwidth must be > 0");
  if (!(st_temperature > 0))
    throw ConfigError("wder: st_temperature must be > 0");
}

void AgentSpec::validate() const {
  if (obs_dim < 1 || action_dim < 1)
    throw ConfigError("agent: obs_dim and action_dim must be >= 1");
  if (K < 1) throw ConfigError("agent: K must be >= 1");
  if (alpha < 0) throw ConfigError("agent: alpha must be >= 0");
  if (alpha > 0 && K < 2)
    throw ConfigError("agent: alpha > 0 needs K >= 2 subpolicies");
  if (subpolicy_duration < 1)
    throw ConfigError("agent: subpolicy_duration must be >= 1");
}

HierAgent::HierAgent(const AgentSpec& s, const PpoParams& ppo,
                     const WderParams& wder, std::uint64_t seed)
    : spec(s) {
  spec.validate();
  ppo.validate();
  wder.validate();
  subs.reserve(static_cast<std::size_t>(spec.K));
  for (int k = 0; k < spec.K; ++k) {
    Rng rng(derive_seed(seed, {0x5b, std::uint64_t(k)}));
    nn::NetSpec ns{spec.obs_dim, spec.action_dim, spec.head, spec.hidden,
                   spec.init_log_std};
    SubPolicy sp;
    sp.pi = nn::PolicyNet(ns, rng);
    sp.v = nn::ValueNet(spec.obs_dim, spec.hidden, rng);
    sp.opt_pi = nn::OptState::for_params(sp.pi.param_count(), ppo.policy_lr);
    sp.opt_v = nn::OptState::for_params(sp.v.param_count(), ppo.value_lr);
    subs.push_back(std::move(sp));
  }
  reinit_master(ppo, derive_seed(seed, {0x3a}));
  const int in_dim = spec.action_dim;
  map = ot::make_feature_map<double>(in_dim, wder.features, wder.bandwidth,
                                     derive_seed(seed, {0xfe}));
}

void HierAgent::reinit_master(const PpoParams& ppo, std::uint64_t seed) {
  Rng rng(seed);
  nn::NetSpec ms{spec.obs_dim, spec.K, nn::HeadType::Categorical, spec.hidden,
                 0.0};
  master = nn::PolicyNet(ms, rng);
  master_v = nn::ValueNet(spec.obs_dim, spec.hidden, rng);
  opt_master = nn::OptState::for_params(master.param_count(), ppo.policy_lr);
  opt_master_v = nn::OptState::for_params(master_v.param_count(), ppo.value_lr);
}

}  // namespace wder::hrl
