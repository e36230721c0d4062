#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "wder/harness/train.hpp"
#include "wder/ot/dual.hpp"
#include "wder/ot/exact.hpp"

namespace wder::harness {

struct Fig2Row {
  double theta = 0.0;
  double wd = 0.0;
  double js = 0.0;
};

/// P = point mass at 0, Q = point mass at theta on the line: exact WD under
/// Euclidean cost and JS divergence over the merged support.
std::vector<Fig2Row> fig2_demo(const std::vector<double>& thetas);
void write_fig2_csv(const fs::path& path, const std::vector<Fig2Row>& rows);

/// Dual estimate between two discrete measures: both are embedded with
/// `map`, potentials are fit on product draws and evaluated on C fresh
/// product draws. Cost is squared Euclidean in feature space.
double estimate_discrete_wd(const ot::DiscreteMeasure<double>& p,
                            const ot::DiscreteMeasure<double>& q,
                            const ot::FeatureMap& map,
                            const ot::OtParams& params, std::uint64_t seed);

/// The same measures pushed through `map`, for the exact oracle.
ot::DiscreteMeasure<double> embedded(const ot::DiscreteMeasure<double>& p,
                                     const ot::FeatureMap& map);

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct SelfCheckReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  nlohmann::json to_json() const;
};

SelfCheckReport wd_selfcheck(std::uint64_t seed = 0);

/// Mean of `avg_return` over the last `frac` of the rows.
double final_return(const std::vector<MetricRow>& rows, double frac = 0.1);
/// Mean over the last `frac` of rows of the mean ordered-pair WD estimate.
double final_pair_wd(const std::vector<MetricRow>& rows, double frac = 0.1);

struct SweepEntry {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double final_return = 0.0;
  double final_wd = 0.0;
  fs::path dir;
};

/// Trains every (alpha, seed) combination under base.out_dir and writes
/// summary.csv there.
std::vector<SweepEntry> sweep(const TrainConfig& base,
                              const std::vector<double>& alphas,
                              const std::vector<std::uint64_t>& seeds);

/// Renders the chosen metrics.csv columns as an SVG line chart, smoothing
/// each series with a trailing moving average of `window` rows.
void plot_metrics(const fs::path& csv, const fs::path& svg,
                  const std::vector<std::string>& columns, int window = 20);

}  // namespace wder::harness
