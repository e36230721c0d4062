#include "wder/harness/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"
#include "wder/bem/behavior.hpp"
#include "wder/errors.hpp"
#include "wder/nn/checkpoint.hpp"
#include "wder/random.hpp"

namespace wder::harness {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// seed tags
enum : std::uint64_t {
  kEnvReset = 1,
  kActions = 2,
  kMasterUpdate = 3,
  kSubUpdate = 4,
  kWdFit = 5,
  kStateSet = 6,
  kTask = 7,
  kMasterReinit = 8,
  kTransfer = 0x7f,
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct EpisodeSeeds {
  std::uint64_t base;
  bool fixed_task;
};

/// Runs one complete episode, appending step and decision records.
double run_episode(hrl::HierAgent& agent, const TrainConfig& cfg, env::Env& env,
                   hrl::RolloutBuffer& buf, long episode,
                   const EpisodeSeeds& seeds) {
  const auto ep = std::uint64_t(episode);
  if (!seeds.fixed_task) {
    const int task = task_index(cfg, episode);
    env.sample_task(derive_seed(seeds.base, {kTask, std::uint64_t(task)}));
    if (cfg.master_reset && episode > 0 &&
        task != task_index(cfg, episode - 1))
      agent.reinit_master(cfg.ppo, derive_seed(seeds.base, {kMasterReinit,
                                                            std::uint64_t(task)}));
  }
  VectorXd obs = env.reset(derive_seed(seeds.base, {kEnvReset, ep}));
  Rng rng(derive_seed(seeds.base, {kActions, ep}));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;

  const int duration = agent.spec.subpolicy_duration;
  const double gamma = cfg.ppo.discount;
  double total = 0.0;
  int k = 0;
  double discount_acc = 1.0;
  for (int t = 0;; ++t) {
    const MatrixXd o = obs.transpose();
    const bool decide = t % duration == 0;
    if (decide) {
      const auto mh = agent.master.forward(o);
      MatrixXd u(1, 1);
      u(0, 0) = unif(rng);
      const MatrixXd choice = nn::sample(mh, u);
      hrl::DecisionRecord d;
      d.obs = obs;
      d.choice = int(choice(0, 0));
      d.log_prob = nn::log_prob(mh, choice)(0);
      d.value = agent.master_v.forward(o)(0);
      buf.decisions.push_back(std::move(d));
      k = buf.decisions.back().choice;
      discount_acc = 1.0;
    }
    auto& sp = agent.subs[std::size_t(k)];
    const auto head = sp.pi.forward(o);
    MatrixXd noise;
    if (head.head == nn::HeadType::Gaussian) {
      noise.resize(1, head.mean.cols());
      for (Index j = 0; j < noise.cols(); ++j) noise(0, j) = normal(rng);
    } else {
      noise.resize(1, 1);
      noise(0, 0) = unif(rng);
    }
    const MatrixXd a = nn::sample(head, noise);

    hrl::StepRecord s;
    s.obs = obs;
    s.action = a.row(0).transpose();
    s.log_prob = nn::log_prob(head, a)(0);
    s.value = sp.v.forward(o)(0);
    s.subpolicy = k;
    s.decision = decide;
    const env::EnvStep r = env.step(s.action);
    s.reward = r.reward;
    s.next_obs = r.observation;
    s.done = r.done;
    total += r.reward;

    auto& d = buf.decisions.back();
    d.reward += discount_acc * r.reward;
    discount_acc *= gamma;
    ++d.steps;
    d.done = r.done;
    buf.steps.push_back(std::move(s));
    obs = r.observation;
    if (r.done) break;
  }
  return total;
}

bool finite(const hrl::UpdateStats& s) {
  return std::isfinite(s.policy_loss) && std::isfinite(s.value_loss) &&
         std::isfinite(s.entropy);
}

bool finite(const hrl::HierAgent& a) {
  if (!a.master.params().allFinite() || !a.master_v.params().allFinite())
    return false;
  for (const auto& s : a.subs)
    if (!s.pi.params().allFinite() || !s.v.params().allFinite()) return false;
  return true;
}

int episodes_per_update(const TrainConfig& cfg, const env::Env& e) {
  return (cfg.steps_per_update + e.horizon() - 1) / e.horizon();
}

nlohmann::json manifest(const TrainConfig& cfg, const env::Env& e) {
  return {{"run_id", cfg.hash()},
          {"config_hash", cfg.hash()},
          {"seed", cfg.seed},
          {"code_version", kCodeVersion},
          {"geometry", e.geometry()},
          {"config", cfg.to_json()},
          {"columns", metric_columns(cfg.agent.K)}};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw IoError("cannot write " + p.string());
  os << text;
}

/// Keeps the header and rows whose update index is <= `last`.
void truncate_metrics(const fs::path& p, int last) {
  if (!fs::exists(p)) return;
  std::ifstream is(p);
  std::string line, out;
  bool header = true;
  while (std::getline(is, line)) {
    if (header || std::stoi(line.substr(0, line.find(','))) <= last)
      out += line + "\n";
    header = false;
  }
  is.close();
  write_text(p, out);
}

std::string join_csv(const std::vector<std::string>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + xs[i];
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

void StateMemory::add(int k, const VectorXd& obs) {
  auto& v = per_sub[std::size_t(k)];
  v.push_back(obs);
  if (int(v.size()) > capacity) v.erase(v.begin());
}

MatrixXd StateMemory::matrix(int k, int obs_dim) const {
  const auto& v = per_sub[std::size_t(k)];
  MatrixXd m(Index(v.size()), obs_dim);
  for (std::size_t i = 0; i < v.size(); ++i) m.row(Index(i)) = v[i].transpose();
  return m;
}

int task_index(const TrainConfig& cfg, long episode) {
  return cfg.task_period > 0 ? int(episode / cfg.task_period) : 0;
}

std::vector<std::string> metric_columns(int K) {
  std::vector<std::string> c = {"update",          "timestep",
                                "episodes",        "avg_return",
                                "task",            "master_policy_loss",
                                "master_value_loss", "master_entropy"};
  for (int k = 0; k < K; ++k)
    for (const char* f : {"steps", "policy_loss", "value_loss", "entropy",
                          "skipped"})
      c.push_back("sub" + std::to_string(k) + "_" + f);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j)
      if (j != k) c.push_back("wd_" + std::to_string(k) + "_" + std::to_string(j));
  for (int k = 0; k < K; ++k) c.push_back("wdmin_" + std::to_string(k));
  for (int k = 0; k < K; ++k) c.push_back("wd_term_" + std::to_string(k));
  c.push_back("wd_clamp_events");
  c.push_back("run_id");
  return c;
}

std::string format_row(const MetricRow& r, const std::string& run_id, int K) {
  std::vector<std::string> v = {std::to_string(r.update),
                                std::to_string(r.timestep),
                                std::to_string(r.episodes),
                                num(r.avg_return),
                                std::to_string(r.task),
                                num(r.master.policy_loss),
                                num(r.master.value_loss),
                                num(r.master.entropy)};
  for (int k = 0; k < K; ++k) {
    const auto& s = r.subs[std::size_t(k)];
    v.push_back(std::to_string(r.sub_steps[std::size_t(k)]));
    v.push_back(num(s.policy_loss));
    v.push_back(num(s.value_loss));
    v.push_back(num(s.entropy));
    v.push_back(s.skipped ? "1" : "0");
  }
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j)
      if (j != k) v.push_back(num(r.wd[std::size_t(k)][std::size_t(j)]));
  for (int k = 0; k < K; ++k) v.push_back(num(r.wd_min[std::size_t(k)]));
  for (int k = 0; k < K; ++k) {
    const auto& s = r.subs[std::size_t(k)];
    v.push_back(num(s.wd_term));
  }
  v.push_back(std::to_string(r.clamp_events));
  v.push_back(run_id);
  return join_csv(v);
}

// ---------------------------------------------------------------------------

void save_checkpoint(const fs::path& path, const TrainState& st,
                     const TrainConfig& cfg) {
  nn::Checkpoint ck;
  const auto& a = st.agent;
  ck.header = {{"format", "wder-checkpoint"},
               {"code_version", kCodeVersion},
               {"config_hash", cfg.hash()},
               {"config", cfg.to_json()},
               {"seed", cfg.seed},
               {"K", a.K()},
               {"head", nn::to_string(a.spec.head)},
               {"update", st.update},
               {"timesteps", st.timesteps},
               {"episodes", st.episodes},
               {"master", nn::describe(a.master)},
               {"master_value", nn::describe(a.master_v)}};
  nn::save_policy(ck, "master", a.master);
  nn::save_value(ck, "master_v", a.master_v);
  nn::save_opt(ck, "opt_master", a.opt_master);
  nn::save_opt(ck, "opt_master_v", a.opt_master_v);
  nlohmann::json subs = nlohmann::json::array();
  for (int k = 0; k < a.K(); ++k) {
    const auto& s = a.subs[std::size_t(k)];
    const std::string p = "sub" + std::to_string(k);
    subs.push_back({{"policy", nn::describe(s.pi)}, {"value", nn::describe(s.v)}});
    nn::save_policy(ck, p + ".pi", s.pi);
    nn::save_value(ck, p + ".v", s.v);
    nn::save_opt(ck, p + ".opt_pi", s.opt_pi);
    nn::save_opt(ck, p + ".opt_v", s.opt_v);
    const MatrixXd m = st.memory.matrix(k, a.spec.obs_dim);
    const MatrixXd mt = m.transpose();
    ck.add(p + ".memory", Eigen::Map<const VectorXd>(mt.data(), mt.size()));
  }
  ck.header["subpolicies"] = subs;
  ck.write(path);
}

TrainState load_checkpoint(const fs::path& path, const TrainConfig& cfg) {
  const auto ck = nn::Checkpoint::read(path);
  if (ck.header.value("format", "") != "wder-checkpoint")
    throw IoError("checkpoint: " + path.string() + " is not a training checkpoint");
  const int K = ck.header.at("K").get<int>();
  if (K != cfg.agent.K)
    throw ConfigError("checkpoint has K=" + std::to_string(K) +
                      " but the config asks for K=" +
                      std::to_string(cfg.agent.K));
  auto e = make_env(cfg);
  TrainState st;
  st.agent = hrl::HierAgent(agent_spec_for(cfg, *e), cfg.ppo, cfg.wder, cfg.seed);
  auto& a = st.agent;
  nn::load_policy(ck, "master", a.master);
  nn::load_value(ck, "master_v", a.master_v);
  nn::load_opt(ck, "opt_master", a.opt_master);
  nn::load_opt(ck, "opt_master_v", a.opt_master_v);
  st.memory.capacity = cfg.state_memory;
  st.memory.per_sub.assign(std::size_t(K), {});
  for (int k = 0; k < K; ++k) {
    auto& s = a.subs[std::size_t(k)];
    const std::string p = "sub" + std::to_string(k);
    nn::load_policy(ck, p + ".pi", s.pi);
    nn::load_value(ck, p + ".v", s.v);
    nn::load_opt(ck, p + ".opt_pi", s.opt_pi);
    nn::load_opt(ck, p + ".opt_v", s.opt_v);
    const auto& flat = ck.get(p + ".memory");
    const Index d = a.spec.obs_dim;
    for (Index i = 0; i + d <= flat.size(); i += d)
      st.memory.per_sub[std::size_t(k)].push_back(flat.segment(i, d));
  }
  st.update = ck.header.at("update").get<int>();
  st.timesteps = ck.header.at("timesteps").get<long>();
  st.episodes = ck.header.at("episodes").get<long>();
  return st;
}

// ---------------------------------------------------------------------------

RunArtifacts train(const TrainConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  auto env = make_env(cfg);
  const hrl::AgentSpec spec = agent_spec_for(cfg, *env);
  const int K = spec.K;

  TrainState st;
  if (!opts.resume_from.empty()) {
    st = load_checkpoint(opts.resume_from, cfg);
  } else {
    st.agent = hrl::HierAgent(spec, cfg.ppo, cfg.wder, cfg.seed);
    st.memory.capacity = cfg.state_memory;
    st.memory.per_sub.assign(std::size_t(K), {});
  }

  RunArtifacts art;
  art.run_id = cfg.hash();
  art.dir = cfg.out_dir;
  const fs::path metrics = art.dir / "metrics.csv";
  std::ofstream csv;
  if (opts.write_files) {
    fs::create_directories(art.dir);
    write_text(art.dir / "manifest.json", manifest(cfg, *env).dump(2) + "\n");
    if (opts.resume_from.empty()) {
      write_text(metrics, join_csv(metric_columns(K)) + "\n");
    } else {
      truncate_metrics(metrics, st.update);
    }
    csv.open(metrics, std::ios::app);
    if (!csv) throw IoError("cannot open " + metrics.string());
  }

  const int per_update = episodes_per_update(cfg, *env);
  const EpisodeSeeds seeds{cfg.seed, false};
  const double alpha = spec.alpha;

  auto checkpoint = [&](const fs::path& p) {
    if (opts.write_files) save_checkpoint(p, st, cfg);
    art.checkpoint = p;
  };
  if (opts.resume_from.empty() && cfg.total_timesteps == 0)
    checkpoint(art.dir / "checkpoint.bin");

  while (st.timesteps < cfg.total_timesteps) {
    if (opts.stop_after_updates >= 0 && st.update >= opts.stop_after_updates)
      break;
    const auto u = std::uint64_t(st.update);
    const hrl::HierAgent backup = st.agent;

    hrl::RolloutBuffer buf;
    double ret_sum = 0.0;
    const int task = task_index(cfg, st.episodes);
    for (int e = 0; e < per_update; ++e)
      ret_sum += run_episode(st.agent, cfg, *env, buf, st.episodes + e, seeds);
    st.episodes += per_update;
    st.timesteps += long(buf.steps.size());

    MetricRow row;
    row.update = st.update + 1;
    row.timestep = st.timesteps;
    row.episodes = st.episodes;
    row.avg_return = ret_sum / per_update;
    row.task = task;
    row.sub_steps.assign(std::size_t(K), 0);
    for (const auto& s : buf.steps) {
      ++row.sub_steps[std::size_t(s.subpolicy)];
      st.memory.add(s.subpolicy, s.obs);
    }

    hrl::compute_advantages(buf, st.agent, cfg.ppo);
    row.master = hrl::ppo_update_master(st.agent, buf, cfg.ppo,
                                        derive_seed(cfg.seed, {kMasterUpdate, u}));

    row.wd.assign(std::size_t(K), std::vector<double>(std::size_t(K), kNaN));
    row.wd_min.assign(std::size_t(K), kNaN);
    std::vector<hrl::WderCache> caches(static_cast<std::size_t>(K));
    if (cfg.regularizer && K >= 2) {
      std::vector<MatrixXd> sources;
      Index total = 0;
      for (int k = 0; k < K; ++k) {
        sources.push_back(st.memory.matrix(k, spec.obs_dim));
        total += sources.back().rows();
      }
      if (total >= cfg.wder.states) {
        const auto states = bem::collect_rollout_states(
            sources, cfg.wder.states, derive_seed(cfg.seed, {kStateSet, u}));
        for (int k = 0; k < K; ++k) {
          if (st.memory.empty(k)) continue;
          auto res = hrl::wd_min(k, st.agent, states, cfg.wder,
                                 derive_seed(cfg.seed, {kWdFit, u}));
          row.wd[std::size_t(k)] = res.distances;
          row.wd_min[std::size_t(k)] = res.value;
          row.clamp_events += long(res.clamp_events);
          caches[std::size_t(k)] = std::move(res.cache);
        }
      }
    }

    row.subs.resize(std::size_t(K));
    for (int k = 0; k < K; ++k) {
      const auto& c = caches[std::size_t(k)];
      const hrl::WderCache* reg =
          cfg.regularizer && alpha > 0 && c.valid() ? &c : nullptr;
      row.subs[std::size_t(k)] = hrl::ppo_update_subpolicy(
          k, st.agent, buf, cfg.ppo, reg, alpha, cfg.wder,
          derive_seed(cfg.seed, {kSubUpdate, u, std::uint64_t(k)}));
    }

    bool ok = finite(row.master) && finite(st.agent);
    for (const auto& s : row.subs) ok = ok && (s.skipped || finite(s));
    if (!ok) {
      st.agent = backup;
      checkpoint(art.dir / "checkpoint_lastgood.bin");
      throw TrainingError("non-finite loss or parameters at update " +
                          std::to_string(st.update + 1) +
                          "; last good state saved to " +
                          (art.dir / "checkpoint_lastgood.bin").string());
    }

    ++st.update;
    if (opts.write_files) {
      csv << format_row(row, art.run_id, K) << "\n";
      csv.flush();
    }
    art.rows.push_back(std::move(row));
    if (cfg.checkpoint_every > 0 && st.update % cfg.checkpoint_every == 0)
      checkpoint(art.dir / ("checkpoint_u" + std::to_string(st.update) + ".bin"));
  }
  if (art.checkpoint.empty() || art.checkpoint.filename() != "checkpoint.bin")
    checkpoint(art.dir / "checkpoint.bin");
  art.updates = st.update;
  art.timesteps = st.timesteps;
  art.agent = std::move(st.agent);
  return art;
}

TransferResult transfer_eval(const fs::path& ckpt, const TrainConfig& cfg,
                             bool write_files) {
  cfg.validate();
  TrainState st = load_checkpoint(ckpt, cfg);
  auto env = make_env(cfg);
  const int K = st.agent.K();
  const std::uint64_t base =
      derive_seed(cfg.seed, {kTransfer, cfg.transfer_task_seed});
  env->sample_task(derive_seed(cfg.transfer_task_seed, {kTask}));
  st.agent.reinit_master(cfg.ppo, derive_seed(base, {kMasterReinit}));

  TransferResult out;
  out.run.run_id = cfg.hash();
  out.run.dir = cfg.out_dir;
  std::ofstream csv;
  if (write_files) {
    fs::create_directories(out.run.dir);
    auto m = manifest(cfg, *env);
    m["protocol"] = "transfer";
    m["source_checkpoint"] = ckpt.string();
    write_text(out.run.dir / "manifest.json", m.dump(2) + "\n");
    csv.open(out.run.dir / "transfer_metrics.csv", std::ios::trunc);
    csv << "update,timestep,avg_return,master_policy_loss,master_entropy,run_id\n";
  }

  const int per_update = episodes_per_update(cfg, *env);
  const EpisodeSeeds seeds{base, true};
  long episodes = 0, steps = 0;
  for (int u = 0; u < cfg.transfer_updates; ++u) {
    hrl::RolloutBuffer buf;
    double ret = 0.0;
    for (int e = 0; e < per_update; ++e)
      ret += run_episode(st.agent, cfg, *env, buf, episodes + e, seeds);
    episodes += per_update;
    steps += long(buf.steps.size());
    hrl::compute_advantages(buf, st.agent, cfg.ppo);
    MetricRow row;
    row.update = u + 1;
    row.timestep = steps;
    row.episodes = episodes;
    row.avg_return = ret / per_update;
    row.master = hrl::ppo_update_master(
        st.agent, buf, cfg.ppo, derive_seed(base, {kMasterUpdate, std::uint64_t(u)}));
    if (!cfg.freeze_subpolicies)
      for (int k = 0; k < K; ++k)
        hrl::ppo_update_subpolicy(
            k, st.agent, buf, cfg.ppo, nullptr, 0.0, cfg.wder,
            derive_seed(base, {kSubUpdate, std::uint64_t(u), std::uint64_t(k)}));
    if (write_files)
      csv << row.update << "," << row.timestep << "," << num(row.avg_return)
          << "," << num(row.master.policy_loss) << ","
          << num(row.master.entropy) << "," << out.run.run_id << "\n";
    out.curve.push_back(row.avg_return);
    out.run.rows.push_back(std::move(row));
  }
  out.run.updates = cfg.transfer_updates;
  out.run.timesteps = steps;
  if (write_files) {
    st.update = cfg.transfer_updates;
    save_checkpoint(out.run.dir / "transfer_checkpoint.bin", st, cfg);
    out.run.checkpoint = out.run.dir / "transfer_checkpoint.bin";
  }
  out.run.agent = std::move(st.agent);
  return out;
}

}  // namespace wder::harness
