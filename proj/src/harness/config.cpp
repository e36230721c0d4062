#include "wder/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "wder/errors.hpp"

namespace wder::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_num(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end)
    throw ConfigError("config: bad value '" + v + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw ConfigError("config: bad boolean '" + v + "' for " + key);
}

std::vector<int> parse_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_num<int>(key, trim(item)));
  return out;
}

std::string join(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i)
    s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

struct Field {
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&)> set;
};

#define WDER_NUM(KEY, EXPR, TYPE)                                         \
  {                                                                       \
    KEY, Field {                                                          \
      [](const TrainConfig& c) {                                          \
        if constexpr (std::is_floating_point_v<TYPE>) return fmt(c.EXPR); \
        else return std::to_string(c.EXPR);                               \
      },                                                                  \
          [](TrainConfig& c, const std::string& v) {                      \
            c.EXPR = parse_num<TYPE>(KEY, v);                             \
          }                                                               \
    }                                                                     \
  }

#define WDER_BOOL(KEY, EXPR)                                      \
  {                                                               \
    KEY, Field {                                                  \
      [](const TrainConfig& c) {                                  \
        return std::string(c.EXPR ? "true" : "false");            \
      },                                                          \
          [](TrainConfig& c, const std::string& v) {              \
            c.EXPR = parse_bool(KEY, v);                          \
          }                                                       \
    }                                                             \
  }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> f = {
      {"env", Field{[](const TrainConfig& c) { return c.env; },
                    [](TrainConfig& c, const std::string& v) { c.env = v; }}},
      WDER_NUM("mb.arena", mb.arena, double),
      WDER_NUM("mb.step_size", mb.step_size, double),
      WDER_NUM("mb.reward_radius", mb.reward_radius, double),
      WDER_NUM("mb.horizon", mb.horizon, int),
      WDER_NUM("mb.targets", mb.targets, int),
      WDER_NUM("pr.arena", pr.arena, double),
      WDER_NUM("pr.max_speed", pr.max_speed, double),
      WDER_NUM("pr.horizon", pr.horizon, int),
      WDER_NUM("K", agent.K, int),
      WDER_NUM("alpha", agent.alpha, double),
      WDER_NUM("subpolicy_duration", agent.subpolicy_duration, int),
      {"hidden",
       Field{[](const TrainConfig& c) { return join(c.agent.hidden); },
             [](TrainConfig& c, const std::string& v) {
               c.agent.hidden = parse_ints("hidden", v);
             }}},
      WDER_NUM("init_log_std", agent.init_log_std, double),
      WDER_NUM("ot.smoothing", wder.ot.smoothing, double),
      WDER_NUM("ot.step_size", wder.ot.step_size, double),
      WDER_NUM("ot.rounds", wder.ot.rounds, int),
      WDER_NUM("ot.eval_samples", wder.ot.eval_samples, int),
      WDER_NUM("ot.exp_clamp", wder.ot.exp_clamp, double),
      WDER_BOOL("ot.bounded_step", wder.ot.bounded_step),
      {"ot.form",
       Field{[](const TrainConfig& c) {
               return std::string(c.wder.ot.form == ot::DualForm::Smoothed
                                      ? "smoothed"
                                      : "scaled_penalty");
             },
             [](TrainConfig& c, const std::string& v) {
               if (v == "smoothed")
                 c.wder.ot.form = ot::DualForm::Smoothed;
               else if (v == "scaled_penalty")
                 c.wder.ot.form = ot::DualForm::ScaledPenalty;
               else
                 throw ConfigError("config: ot.form must be smoothed or "
                                   "scaled_penalty");
             }}},
      WDER_NUM("bem.states", wder.states, int),
      WDER_NUM("bem.actions", wder.actions, int),
      WDER_NUM("bem.features", wder.features, int),
      WDER_NUM("bem.bandwidth", wder.bandwidth, double),
      WDER_NUM("bem.st_temperature", wder.st_temperature, double),
      WDER_NUM("state_memory", state_memory, int),
      WDER_BOOL("regularizer", regularizer),
      WDER_NUM("ppo.clip", ppo.clip, double),
      WDER_NUM("ppo.epochs", ppo.epochs, int),
      WDER_NUM("ppo.minibatches", ppo.minibatches, int),
      WDER_NUM("ppo.discount", ppo.discount, double),
      WDER_NUM("ppo.gae_lambda", ppo.gae_lambda, double),
      WDER_NUM("ppo.entropy_coef", ppo.entropy_coef, double),
      WDER_NUM("ppo.policy_lr", ppo.policy_lr, double),
      WDER_NUM("ppo.value_lr", ppo.value_lr, double),
      WDER_NUM("ppo.max_grad_norm", ppo.max_grad_norm, double),
      WDER_BOOL("ppo.normalize_advantages", ppo.normalize_advantages),
      WDER_NUM("total_timesteps", total_timesteps, long),
      WDER_NUM("steps_per_update", steps_per_update, int),
      WDER_NUM("task_period", task_period, int),
      WDER_BOOL("master_reset", master_reset),
      WDER_NUM("seed", seed, std::uint64_t),
      WDER_NUM("checkpoint_every", checkpoint_every, int),
      WDER_NUM("transfer.updates", transfer_updates, int),
      WDER_BOOL("transfer.freeze_subpolicies", freeze_subpolicies),
      WDER_NUM("transfer.task_seed", transfer_task_seed, std::uint64_t),
      {"out_dir",
       Field{[](const TrainConfig& c) { return c.out_dir; },
             [](TrainConfig& c, const std::string& v) { c.out_dir = v; }}},
  };
  return f;
}

#undef WDER_NUM
#undef WDER_BOOL

}  // namespace

void TrainConfig::validate() const {
  if (env == "movement_bandits")
    mb.validate();
  else if (env == "point_reach")
    pr.validate();
  else
    throw ConfigError("config: unknown env '" + env + "'");
  if (agent.K < 1) throw ConfigError("config: K must be >= 1");
  if (agent.alpha < 0) throw ConfigError("config: alpha must be >= 0");
  if (agent.alpha > 0 && agent.K < 2)
    throw ConfigError("config: alpha > 0 needs K >= 2");
  if (agent.subpolicy_duration < 1)
    throw ConfigError("config: subpolicy_duration must be >= 1");
  if (agent.hidden.empty() ||
      std::any_of(agent.hidden.begin(), agent.hidden.end(),
                  [](int h) { return h < 1; }))
    throw ConfigError("config: hidden sizes must be >= 1");
  if (agent.alpha > 0 && !regularizer)
    throw ConfigError("config: alpha > 0 requires regularizer = on");
  ppo.validate();
  wder.validate();
  if (state_memory < 1) throw ConfigError("config: state_memory must be >= 1");
  if (total_timesteps < 0)
    throw ConfigError("config: total_timesteps must be >= 0");
  if (steps_per_update < 1)
    throw ConfigError("config: steps_per_update must be >= 1");
  if (task_period < 0) throw ConfigError("config: task_period must be >= 0");
  if (checkpoint_every < 0)
    throw ConfigError("config: checkpoint_every must be >= 0");
  if (transfer_updates < 1)
    throw ConfigError("config: transfer.updates must be >= 1");
}

std::string TrainConfig::to_kv() const {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(*this) + "\n";
  return out;
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, f] : fields()) j[k] = f.get(*this);
  return j;
}

std::string TrainConfig::hash() const {
  // out_dir does not change results, so it is left out of the hash
  TrainConfig c = *this;
  c.out_dir.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : c.to_kv()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("config: unknown key '" + key + "'");
  it->second.set(*this, value);
}

TrainConfig TrainConfig::parse(const std::string& text) {
  TrainConfig c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.resize(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not key = value");
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

std::vector<std::string> TrainConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [k, f] : fields()) out.push_back(k);
  return out;
}

std::unique_ptr<env::Env> make_env(const TrainConfig& cfg) {
  if (cfg.env == "movement_bandits")
    return std::make_unique<env::MovementBandits>(cfg.mb);
  if (cfg.env == "point_reach") return std::make_unique<env::PointReach>(cfg.pr);
  throw ConfigError("config: unknown env '" + cfg.env + "'");
}

hrl::AgentSpec agent_spec_for(const TrainConfig& cfg, const env::Env& e) {
  hrl::AgentSpec s = cfg.agent;
  s.obs_dim = e.obs_dim();
  s.head = e.action_head();
  s.action_dim = e.action_dim();
  return s;
}

}  // namespace wder::harness
