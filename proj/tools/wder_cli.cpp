#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wder/errors.hpp"
#include "wder/harness/experiments.hpp"

namespace {

using wder::harness::TrainConfig;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<std::string> env;
  std::optional<std::string> out_dir;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key = value config file");
    app->add_option("--seed", seed, "override seed");
    app->add_option("--alpha", alpha, "override regularizer coefficient");
    app->add_option("--env", env, "movement_bandits or point_reach");
    app->add_option("--out-dir", out_dir, "output directory");
    app->add_option("--set", sets, "extra key=value override (repeatable)");
  }

  TrainConfig build() const {
    TrainConfig c = config.empty() ? TrainConfig{} : TrainConfig::load(config);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw wder::UsageError("--set expects key=value, got '" + s + "'");
      c.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed) c.seed = *seed;
    if (alpha) c.agent.alpha = *alpha;
    if (env) c.env = *env;
    if (out_dir) c.out_dir = *out_dir;
    c.validate();
    return c;
  }
};

void emit(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump()
            << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein diversity-regularized hierarchical RL"};
  app.require_subcommand(1);

  Overrides train_o, transfer_o, sweep_o;
  auto* train_cmd = app.add_subcommand("train", "run hierarchical training");
  train_o.attach(train_cmd);
  std::string resume;
  int stop_after = -1;
  train_cmd->add_option("--resume", resume, "checkpoint to resume from");
  train_cmd->add_option("--stop-after", stop_after,
                        "stop after this many updates (with a checkpoint)");

  auto* transfer_cmd =
      app.add_subcommand("transfer-eval", "adapt a fresh master over frozen subpolicies");
  transfer_o.attach(transfer_cmd);
  std::string checkpoint;
  transfer_cmd->add_option("--checkpoint", checkpoint, "trained checkpoint")
      ->required();

  auto* fig2_cmd = app.add_subcommand("fig2", "exact WD vs JS on two point masses");
  std::vector<double> thetas = {0, 0.25, 0.5, 1, 2};
  std::string fig2_out = "fig2.csv";
  fig2_cmd->add_option("--theta", thetas, "theta grid");
  fig2_cmd->add_option("--out", fig2_out, "CSV path");

  auto* self_cmd = app.add_subcommand("selfcheck", "estimator vs oracle battery");
  std::uint64_t self_seed = 0;
  self_cmd->add_option("--seed", self_seed, "seed");

  auto* sweep_cmd = app.add_subcommand("sweep", "alpha sweep over seeds");
  sweep_o.attach(sweep_cmd);
  std::vector<double> alphas = {0.0, 0.2, 0.3, 0.4, 0.5, 0.6};
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  sweep_cmd->add_option("--alphas", alphas, "alpha grid");
  sweep_cmd->add_option("--seeds", seeds, "seeds");

  auto* plot_cmd = app.add_subcommand("plot", "render metrics.csv columns to SVG");
  std::string metrics, svg = "plot.svg";
  std::vector<std::string> columns = {"avg_return"};
  int window = 20;
  plot_cmd->add_option("--metrics", metrics, "metrics.csv")->required();
  plot_cmd->add_option("--out", svg, "SVG path");
  plot_cmd->add_option("--columns", columns, "columns to draw");
  plot_cmd->add_option("--window", window, "moving-average window");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    using namespace wder::harness;
    if (*train_cmd) {
      const auto cfg = train_o.build();
      TrainOptions opts;
      opts.resume_from = resume;
      opts.stop_after_updates = stop_after;
      const auto run = train(cfg, opts);
      emit({{"run_id", run.run_id},
            {"dir", run.dir.string()},
            {"updates", run.updates},
            {"timesteps", run.timesteps},
            {"final_return", final_return(run.rows)},
            {"final_pair_wd", final_pair_wd(run.rows)},
            {"checkpoint", run.checkpoint.string()}});
    } else if (*transfer_cmd) {
      const auto cfg = transfer_o.build();
      const auto res = transfer_eval(checkpoint, cfg);
      emit({{"run_id", res.run.run_id},
            {"dir", res.run.dir.string()},
            {"curve", res.curve}});
    } else if (*fig2_cmd) {
      const auto rows = fig2_demo(thetas);
      write_fig2_csv(fig2_out, rows);
      nlohmann::json j = nlohmann::json::array();
      for (const auto& r : rows)
        j.push_back({{"theta", r.theta}, {"wd", r.wd}, {"js", r.js}});
      emit({{"csv", fig2_out}, {"rows", j}});
    } else if (*self_cmd) {
      const auto rep = wd_selfcheck(self_seed);
      emit(rep.to_json());
    } else if (*sweep_cmd) {
      const auto cfg = sweep_o.build();
      const auto entries = sweep(cfg, alphas, seeds);
      nlohmann::json j = nlohmann::json::array();
      for (const auto& e : entries)
        j.push_back({{"alpha", e.alpha},
                     {"seed", e.seed},
                     {"final_return", e.final_return},
                     {"final_wd", e.final_wd},
                     {"dir", e.dir.string()}});
      emit({{"summary", (std::filesystem::path(cfg.out_dir) / "summary.csv").string()},
            {"runs", j}});
    } else if (*plot_cmd) {
      plot_metrics(metrics, svg, columns, window);
      emit({{"svg", svg}});
    }
  } catch (const wder::Error& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
