#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wder/harness/experiments.hpp"
#include "wder/hrl/regularizer.hpp"
#include "wder/ot/exact.hpp"

namespace fs = std::filesystem;
using namespace wder;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double sample_variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / double(v.size() - 1);
}

// P(X >= wins) for X ~ Binomial(n, 1/2)
double sign_test_p(int wins, int n) {
  double p = 0;
  for (int k = wins; k <= n; ++k) {
    double c = 1;
    for (int i = 0; i < k; ++i) c = c * double(n - i) / double(i + 1);
    p += c * std::pow(0.5, n);
  }
  return p;
}

ot::DiscreteMeasure<double> cloud(Rng& rng, Index n) {
  std::uniform_real_distribution<double> u(-3, 3);
  MatrixXd pts(n, 2);
  for (Index i = 0; i < n; ++i) pts.row(i) << u(rng), u(rng);
  return ot::DiscreteMeasure<double>::uniform(pts);
}

// ---------------------------------------------------------------------------

Verdict estimator_accuracy() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto map = ot::make_feature_map<double>(2, 128, 1.0, 2024);
  ot::OtParams p;
  p.smoothing = 0.05;
  p.step_size = 0.005;
  p.rounds = 2000;
  p.eval_samples = 1024;
  int ok = 0;
  const int pairs = 20;
  double worst = 0;
  for (int t = 0; t < pairs; ++t) {
    Rng rng(derive_seed(1, {std::uint64_t(t)}));
    std::uniform_int_distribution<int> size(2, 6);
    const auto a = cloud(rng, size(rng)), b = cloud(rng, size(rng));
    const double exact = ot::exact_wd_discrete(harness::embedded(a, map),
                                               harness::embedded(b, map));
    const double est = harness::estimate_discrete_wd(
        a, b, map, p, derive_seed(2, {std::uint64_t(t)}));
    const double tol = std::max(0.1 * exact, 0.02);
    worst = std::max(worst, std::abs(est - exact) / tol);
    ok += std::abs(est - exact) <= tol;
  }
  double gap = 0;
  for (int t = 0; t < pairs; ++t) {
    Rng rng(derive_seed(3, {std::uint64_t(t)}));
    const Index n = 1 + t % 6;
    const auto a = cloud(rng, n), b = cloud(rng, n);
    gap = std::max(gap, std::abs(ot::exact_wd_discrete(a, b) -
                                 ot::exact_wd_discrete(a, b, ot::SquaredEuclidean{},
                                                       ot::OracleMethod::Permutation)));
  }
  const double secs = seconds_since(t0);
  return {ok == pairs && gap <= 1e-9 && secs < 60,
          std::to_string(ok) + "/" + std::to_string(pairs) +
              " pairs within max(10%, 0.02), worst error/tol " + fmt("%.3f", worst) +
              "; LP vs permutation max gap " + fmt("%.2e", gap) + "; " +
              fmt("%.1f", secs) + " s"};
}

Verdict fig2() {
  const std::vector<double> thetas = {0, 0.25, 0.5, 1, 2};
  const auto rows = harness::fig2_demo(thetas);
  double wd_err = 0, js_err = 0;
  for (const auto& r : rows) {
    wd_err = std::max(wd_err, std::abs(r.wd - r.theta));
    js_err = std::max(js_err, std::abs(r.js - (r.theta == 0 ? 0.0 : std::log(2.0))));
  }
  return {wd_err <= 1e-9 && js_err <= 1e-9,
          "max |WD - theta| " + fmt("%.1e", wd_err) + ", max |JS - {0, ln 2}| " +
              fmt("%.1e", js_err)};
}

hrl::WderParams default_wder() {
  hrl::WderParams w;
  return w;
}

bem::StateSet uniform_states(Index T, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  return {MatrixXd::NullaryExpr(T, dim, [&] { return u(rng); }), "uniform", seed};
}

// max over params of |a - b| / max(|a|, |b|) where the scale exceeds floor;
// an entry violates when it misses both the relative and the absolute bound
double worst_relative(const VectorXd& a, const VectorXd& b, double floor,
                      int* violations, double rel) {
  double worst = 0;
  for (Index i = 0; i < a.size(); ++i) {
    const double d = std::abs(a(i) - b(i));
    const double scale = std::max(std::abs(a(i)), std::abs(b(i)));
    if (scale > floor) worst = std::max(worst, d / scale);
    if (d > floor && d > rel * scale) ++*violations;
  }
  return worst;
}

Verdict gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  hrl::AgentSpec spec;
  spec.obs_dim = 3;
  spec.head = nn::HeadType::Gaussian;
  spec.action_dim = 2;
  spec.K = 2;
  spec.hidden = {64, 64};
  spec.init_log_std = -0.5;
  spec.alpha = 0.5;
  hrl::PpoParams ppo;
  const auto w = default_wder();
  hrl::HierAgent agent(spec, ppo, w, 31);
  const auto states = uniform_states(w.states, 3, 5);
  int wd_bad = 0;
  double wd_worst = 0, g_max = 0;
  Index checked = 0;
  for (int k = 0; k < 2; ++k) {
    const auto r = hrl::wd_min(k, agent, states, w, 77);
    const auto& pi = agent.subs[std::size_t(k)].pi;
    const VectorXd g = hrl::wder_gradient(pi, r.cache, spec.alpha, w);
    VectorXd fd(pi.param_count());
    const double h = 1e-5;
    for (Index i = 0; i < pi.param_count(); ++i) {
      nn::PolicyNet a = pi, b = pi;
      a.mutable_params()(i) += h;
      b.mutable_params()(i) -= h;
      fd(i) = -spec.alpha *
              (hrl::wder_evaluate(a, r.cache, w).wd - hrl::wder_evaluate(b, r.cache, w).wd) /
              (2 * h);
    }
    wd_worst = std::max(wd_worst, worst_relative(g, fd, 1e-8, &wd_bad, 1e-3));
    g_max = std::max(g_max, g.cwiseAbs().maxCoeff());
    checked += pi.param_count();
  }

  // plain network gradients: log-prob + entropy objective and critic
  int net_bad = 0;
  double net_worst = 0;
  Rng rng(9);
  std::normal_distribution<double> n(0, 1);
  for (auto head : {nn::HeadType::Categorical, nn::HeadType::Gaussian}) {
    nn::NetSpec s;
    s.obs_dim = 4;
    s.action_dim = 3;
    s.head = head;
    s.hidden = {16, 16};
    nn::PolicyNet net(s, rng);
    net.mutable_params() += 0.1 * VectorXd::NullaryExpr(net.param_count(), [&] { return n(rng); });
    const MatrixXd obs = MatrixXd::NullaryExpr(6, 4, [&] { return n(rng); });
    MatrixXd act;
    if (head == nn::HeadType::Gaussian) {
      act = MatrixXd::NullaryExpr(6, 3, [&] { return n(rng); });
    } else {
      act.resize(6, 1);
      act << 0, 1, 2, 2, 1, 0;
    }
    const VectorXd wts = VectorXd::NullaryExpr(6, [&] { return n(rng); });
    auto f = [&](const nn::PolicyNet& p) {
      const auto o = p.forward(obs);
      return wts.dot(nn::log_prob(o, act)) + 0.3 * wts.dot(nn::entropy(o));
    };
    nn::PolicyCache c;
    const auto o = net.forward(obs, &c);
    auto hg = nn::log_prob_grad(o, act, wts);
    const auto he = nn::entropy_grad(o, 0.3 * wts);
    hg.d_out += he.d_out;
    if (head == nn::HeadType::Gaussian) hg.d_log_std += he.d_log_std;
    const VectorXd g = net.backward(c, hg);
    VectorXd fd(net.param_count());
    for (Index i = 0; i < net.param_count(); ++i) {
      nn::PolicyNet a = net, b = net;
      a.mutable_params()(i) += 1e-6;
      b.mutable_params()(i) -= 1e-6;
      fd(i) = (f(a) - f(b)) / 2e-6;
    }
    net_worst = std::max(net_worst, worst_relative(g, fd, 1e-8, &net_bad, 1e-4));
  }
  {
    nn::ValueNet v(4, {16, 16}, rng);
    const MatrixXd obs = MatrixXd::NullaryExpr(6, 4, [&] { return n(rng); });
    const VectorXd wts = VectorXd::NullaryExpr(6, [&] { return n(rng); });
    nn::PolicyCache c;
    v.forward(obs, &c);
    const VectorXd g = v.backward(c, wts);
    VectorXd fd(v.param_count());
    for (Index i = 0; i < v.param_count(); ++i) {
      nn::ValueNet a = v, b = v;
      a.mutable_params()(i) += 1e-6;
      b.mutable_params()(i) -= 1e-6;
      fd(i) = (wts.dot(a.forward(obs)) - wts.dot(b.forward(obs))) / 2e-6;
    }
    net_worst = std::max(net_worst, worst_relative(g, fd, 1e-8, &net_bad, 1e-4));
  }
  const double secs = seconds_since(t0);
  return {wd_bad == 0 && net_bad == 0 && secs < 120,
          "WDER: " + std::to_string(wd_bad) + " of " + std::to_string(checked) +
              " params beyond 1e-3 rel (worst " + fmt("%.2e", wd_worst) +
              ", max |grad| " + fmt("%.2e", g_max) +
              "); networks: " + std::to_string(net_bad) + " beyond 1e-4 (worst " +
              fmt("%.2e", net_worst) + "); " + fmt("%.1f", secs) + " s"};
}

Verdict separation() {
  hrl::PpoParams ppo;
  const auto w = default_wder();
  int seeds_ok = 0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    hrl::AgentSpec spec;
    spec.obs_dim = 3;
    spec.head = nn::HeadType::Gaussian;
    spec.action_dim = 1;
    spec.K = 2;
    spec.hidden = {64, 64};
    spec.init_log_std = -0.5;
    spec.alpha = 1.0;
    hrl::HierAgent agent(spec, ppo, w, seed);
    // near-identical twin
    agent.subs[1].pi = agent.subs[0].pi;
    Rng jitter(derive_seed(seed, {0x1d}));
    std::normal_distribution<double> n(0, 1e-3);
    for (Index i = 0; i < agent.subs[1].pi.param_count(); ++i)
      agent.subs[1].pi.mutable_params()(i) += n(jitter);

    const auto probes = uniform_states(10, 3, derive_seed(seed, {0x9b}));
    std::vector<double> eps(4000);
    Rng er(derive_seed(seed, {0xe9}));
    std::normal_distribution<double> z(0, 1);
    for (auto& e : eps) e = z(er);
    auto distances = [&] {
      std::vector<double> d;
      for (Index t = 0; t < probes.size(); ++t) {
        const auto h0 = agent.subs[0].pi.forward(probes.states.row(t));
        const auto h1 = agent.subs[1].pi.forward(probes.states.row(t));
        std::vector<double> xs, ys;
        for (double e : eps) {
          xs.push_back(h0.mean(0, 0) + std::exp(h0.log_std(0)) * e);
          ys.push_back(h1.mean(0, 0) + std::exp(h1.log_std(0)) * e);
        }
        d.push_back(ot::exact_wd_1d(xs, ys, 1));
      }
      return d;
    };
    const auto before = distances();
    for (int step = 0; step < 100; ++step) {
      const auto states = uniform_states(w.states, 3, derive_seed(seed, {0x5e, std::uint64_t(step)}));
      for (int k = 0; k < 2; ++k) {
        auto& sp = agent.subs[std::size_t(k)];
        const auto r = hrl::wd_min(k, agent, states, w, derive_seed(seed, {std::uint64_t(step)}));
        VectorXd g = hrl::wder_gradient(sp.pi, r.cache, spec.alpha, w);
        nn::clip_grad_norm(g, ppo.max_grad_norm);
        nn::opt_step(sp.pi.mutable_params(), g, sp.opt_pi);
      }
    }
    const auto after = distances();
    int up = 0;
    for (std::size_t i = 0; i < after.size(); ++i) up += after[i] > before[i];
    seeds_ok += up == 10;
    per_seed += (per_seed.empty() ? "" : " ") + std::to_string(up);
  }
  return {seeds_ok >= 9, std::to_string(seeds_ok) +
                             "/10 seeds increase at all 10 probes (probes up per seed: " +
                             per_seed + ")"};
}

Verdict crn_variance() {
  hrl::AgentSpec spec;
  spec.obs_dim = 3;
  spec.head = nn::HeadType::Gaussian;
  spec.action_dim = 2;
  spec.K = 2;
  spec.hidden = {64, 64};
  hrl::PpoParams ppo;
  const auto w = default_wder();
  const hrl::HierAgent agent(spec, ppo, w, 123);
  const auto states = uniform_states(w.states, 3, 8);
  std::vector<double> common, indep;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto crn = derive_seed(s, {0xc0}), fit = derive_seed(s, {0xf0});
    common.push_back(hrl::fit_pair(0, agent.subs[0].pi, 1, agent.subs[1].pi, states,
                                   agent.map, w, crn, fit, bem::Coupling::Common).wd);
    indep.push_back(hrl::fit_pair(0, agent.subs[0].pi, 1, agent.subs[1].pi, states,
                                  agent.map, w, crn, fit, bem::Coupling::Independent).wd);
  }
  const double vc = sample_variance(common), vi = sample_variance(indep);
  return {vc < vi, "variance common " + fmt("%.3e", vc) + " vs independent " +
                       fmt("%.3e", vi) + " over 20 seeds"};
}

// ---------------------------------------------------------------------------
// training-based criteria

struct PairedRuns {
  std::vector<std::uint64_t> seeds;
  std::vector<harness::RunArtifacts> reg, base;  // alpha = 0.5 and alpha = 0
  std::vector<harness::TrainConfig> reg_cfg, base_cfg;
};

harness::TrainConfig mb_config(double alpha, std::uint64_t seed, const fs::path& root) {
  harness::TrainConfig c;
  c.env = "movement_bandits";
  c.agent.K = 2;
  c.agent.subpolicy_duration = 10;
  c.agent.alpha = alpha;
  c.total_timesteps = 200000;
  c.seed = seed;
  c.out_dir = (root / fmt("alpha_%.1f", alpha) / ("seed_" + std::to_string(seed))).string();
  return c;
}

PairedRuns train_pairs(int n, const fs::path& root) {
  PairedRuns out;
  for (int i = 0; i < n; ++i) {
    const auto seed = std::uint64_t(i);
    out.seeds.push_back(seed);
    for (double a : {0.5, 0.0}) {
      const auto t0 = std::chrono::steady_clock::now();
      auto c = mb_config(a, seed, root);
      auto run = harness::train(c);
      std::fprintf(stderr, "  trained alpha=%.1f seed=%d in %.0f s: final return %.2f, pair WD %.4f\n",
                   a, i, seconds_since(t0), harness::final_return(run.rows),
                   harness::final_pair_wd(run.rows));
      (a > 0 ? out.reg : out.base).push_back(std::move(run));
      (a > 0 ? out.reg_cfg : out.base_cfg).push_back(c);
    }
  }
  return out;
}

Verdict diversity(const PairedRuns& runs) {
  std::vector<double> wd_r, wd_b, ret_r, ret_b;
  for (std::size_t i = 0; i < runs.seeds.size(); ++i) {
    wd_r.push_back(harness::final_pair_wd(runs.reg[i].rows));
    wd_b.push_back(harness::final_pair_wd(runs.base[i].rows));
    ret_r.push_back(harness::final_return(runs.reg[i].rows));
    ret_b.push_back(harness::final_return(runs.base[i].rows));
  }
  int wins = 0, trials = 0;
  for (std::size_t i = 0; i < ret_r.size(); ++i) {
    if (ret_r[i] == ret_b[i]) continue;
    ++trials;
    wins += ret_r[i] > ret_b[i];
  }
  const double p = trials ? sign_test_p(wins, trials) : 1.0;
  const bool a = mean(wd_r) > mean(wd_b);
  const bool b = mean(ret_r) >= mean(ret_b) && p <= 0.10;
  return {a && b, std::string("(a) ") + (a ? "pass" : "fail") + ": mean final WD " +
                      fmt("%.4f", mean(wd_r)) + " vs " + fmt("%.4f", mean(wd_b)) +
                      "; (b) " + (b ? "pass" : "fail") + ": mean final return " +
                      fmt("%.2f", mean(ret_r)) + " vs " + fmt("%.2f", mean(ret_b)) +
                      ", sign test " + std::to_string(wins) + "/" +
                      std::to_string(trials) + " p=" + fmt("%.3f", p) + " (" +
                      std::to_string(runs.seeds.size()) + " paired seeds)"};
}

// First update whose trailing 3-update mean reaches `threshold`; curve size
// + 1 when it never does.
double updates_to_reach(const std::vector<double>& curve, double threshold) {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    double s = 0;
    for (std::size_t j = lo; j <= i; ++j) s += curve[j];
    if (s / double(i - lo + 1) >= threshold) return double(i + 1);
  }
  return double(curve.size() + 1);
}

double plateau(const std::vector<double>& curve) {
  const std::size_t start = curve.size() - std::max<std::size_t>(1, curve.size() / 4);
  double s = 0;
  for (std::size_t i = start; i < curve.size(); ++i) s += curve[i];
  return s / double(curve.size() - start);
}

Verdict transfer(const PairedRuns& runs, const fs::path& root) {
  std::vector<double> ur, ub;
  for (std::size_t i = 0; i < runs.seeds.size(); ++i) {
    auto cr = runs.reg_cfg[i], cb = runs.base_cfg[i];
    cr.out_dir = (fs::path(cr.out_dir) / "transfer").string();
    cb.out_dir = (fs::path(cb.out_dir) / "transfer").string();
    const auto tr = harness::transfer_eval(runs.reg[i].checkpoint, cr);
    const auto tb = harness::transfer_eval(runs.base[i].checkpoint, cb);
    // one threshold per seed so a low plateau cannot count as fast
    const double th = 0.9 * std::max(plateau(tr.curve), plateau(tb.curve));
    ur.push_back(updates_to_reach(tr.curve, th));
    ub.push_back(updates_to_reach(tb.curve, th));
  }
  (void)root;
  const double mr = median(ur), mb = median(ub);
  return {mr < mb, "median master updates to 90% of plateau: " + fmt("%.1f", mr) +
                       " (alpha 0.5) vs " + fmt("%.1f", mb) + " (alpha 0) over " +
                       std::to_string(runs.seeds.size()) + " seeds"};
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string drop_wd_columns(const fs::path& p) {
  std::ifstream is(p);
  std::string line, out;
  std::vector<bool> keep;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (keep.empty())
      for (const auto& h : cells) keep.push_back(h.rfind("wd", 0) != 0 && h != "run_id");
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (keep[i]) out += cells[i] + ",";
    out += "\n";
  }
  return out;
}

bool same_params(const hrl::HierAgent& a, const hrl::HierAgent& b) {
  if (a.master.params() != b.master.params()) return false;
  for (int k = 0; k < a.K(); ++k)
    if (a.subs[std::size_t(k)].pi.params() != b.subs[std::size_t(k)].pi.params() ||
        a.subs[std::size_t(k)].v.params() != b.subs[std::size_t(k)].v.params())
      return false;
  return true;
}

Verdict determinism(const PairedRuns& runs, const fs::path& root) {
  auto again = runs.reg_cfg[0];
  again.out_dir = (root / "repeat").string();
  const auto rerun = harness::train(again);
  const bool bitwise =
      read_file(fs::path(again.out_dir) / "metrics.csv") ==
          read_file(fs::path(runs.reg_cfg[0].out_dir) / "metrics.csv") &&
      same_params(rerun.agent, runs.reg[0].agent);

  auto off = runs.base_cfg[0];
  off.regularizer = false;
  off.out_dir = (root / "regularizer_off").string();
  const auto plain = harness::train(off);
  const bool ablation =
      drop_wd_columns(fs::path(off.out_dir) / "metrics.csv") ==
          drop_wd_columns(fs::path(runs.base_cfg[0].out_dir) / "metrics.csv") &&
      same_params(plain.agent, runs.base[0].agent);
  return {bitwise && ablation,
          std::string("repeat run ") + (bitwise ? "bitwise identical" : "DIFFERS") +
              "; alpha=0 vs regularizer-free path " +
              (ablation ? "identical (metrics without WD telemetry, all parameters)"
                        : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  bool strict = false;
  int pairs = 10;
  std::string root_dir = (fs::temp_directory_path() / "wder_acceptance").string();
  std::vector<int> only;
  app.add_flag("--strict", strict, "exit nonzero when any criterion fails");
  app.add_option("--pairs", pairs, "paired seeds for the training criteria")
      ->check(CLI::Range(6, 100));
  app.add_option("--out", root_dir, "directory for training runs");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::set<int> wanted(only.begin(), only.end());
  auto want = [&](int c) { return wanted.empty() || wanted.count(c) > 0; };
  const fs::path root = root_dir;
  fs::remove_all(root);

  struct Line {
    int id;
    std::string name;
    Verdict v;
  };
  std::vector<Line> lines;
  auto run = [&](int id, const std::string& name, const std::function<Verdict()>& f) {
    if (!want(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::fprintf(stderr, "criterion %d done in %.0f s\n", id, seconds_since(t0));
    lines.push_back({id, name, v});
  };

  run(1, "estimator accuracy", estimator_accuracy);
  run(2, "fig2 reproduction", fig2);
  run(3, "gradient correctness", gradient_correctness);
  run(4, "separation property", separation);

  PairedRuns runs;
  if (want(5) || want(6) || want(7)) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      runs = train_pairs(pairs, root);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "training failed: %s\n", e.what());
    }
    std::fprintf(stderr, "paired training done in %.0f s\n", seconds_since(t0));
  }
  auto need_runs = [&](const std::function<Verdict()>& f) {
    return [&, f] {
      if (runs.seeds.empty()) return Verdict{false, "paired training runs unavailable"};
      return f();
    };
  };
  run(5, "diversity under training", need_runs([&] { return diversity(runs); }));
  run(6, "transfer analogue", need_runs([&] { return transfer(runs, root); }));
  run(7, "determinism and ablation identity",
      need_runs([&] { return determinism(runs, root); }));
  run(8, "CRN variance reduction", crn_variance);

  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  bool all = true;
  for (const auto& l : lines) {
    std::printf("[%s] %d %s: %s\n", l.v.pass ? "PASS" : "FAIL", l.id, l.name.c_str(),
                l.v.detail.c_str());
    all = all && l.v.pass;
  }
  std::fflush(stdout);
  return strict && !all ? 1 : 0;
}
