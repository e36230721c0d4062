#include <algorithm>
#include <cmath>
#include <random>

#include "wder/harness/experiments.hpp"
#include "wder/random.hpp"

namespace wder::harness {

namespace {

ot::DiscreteMeasure<double> random_cloud(Rng& rng, Eigen::Index n, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  ot::Matrix<double> pts(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) pts.row(i) << u(rng), u(rng);
  return ot::DiscreteMeasure<double>::uniform(pts);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ot::OtParams tight(double smoothing) {
  ot::OtParams p;
  p.smoothing = smoothing;
  p.step_size = smoothing / 10.0;
  p.rounds = 2000;
  p.eval_samples = 1024;
  return p;
}

}  // namespace

bool SelfCheckReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

nlohmann::json SelfCheckReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : checks)
    j.push_back({{"name", c.name},
                 {"passed", c.passed},
                 {"measured", c.measured},
                 {"threshold", c.threshold},
                 {"detail", c.detail}});
  return {{"checks", j}, {"all_passed", all_passed()}};
}

SelfCheckReport wd_selfcheck(std::uint64_t seed) {
  SelfCheckReport rep;
  const auto map = ot::make_feature_map<double>(2, 128, 1.0, derive_seed(seed, {1}));

  {  // identical measures: estimate within the smoothing-bias band
    Rng rng(derive_seed(seed, {2}));
    const auto p = random_cloud(rng, 5, 3.0);
    const auto params = tight(0.05);
    const double est = estimate_discrete_wd(p, p, map, params, derive_seed(seed, {3}));
    const double bound =
        params.smoothing * std::max(1.0, std::log(5.0) - 1.0) + 0.02;
    rep.checks.push_back({"identical_measures", std::abs(est) <= bound,
                          std::abs(est), bound, "|estimate| vs smoothing bias"});
  }

  {  // 5-point uniform measures against the LP oracle
    double worst = 0.0;
    int ok = 0;
    const int trials = 10;
    for (int t = 0; t < trials; ++t) {
      Rng rng(derive_seed(seed, {4, std::uint64_t(t)}));
      const auto p = random_cloud(rng, 5, 3.0), q = random_cloud(rng, 5, 3.0);
      const double exact = ot::exact_wd_discrete(embedded(p, map), embedded(q, map));
      const double est = estimate_discrete_wd(p, q, map, tight(0.05),
                                              derive_seed(seed, {5, std::uint64_t(t)}));
      const double err = std::abs(est - exact);
      const double tol = std::max(0.1 * exact, 0.02);
      worst = std::max(worst, err / std::max(exact, 0.2));
      ok += err <= tol;
    }
    rep.checks.push_back({"lp_oracle_5pt", ok == trials, double(ok), double(trials),
                          "trials within max(10% rel, 0.02 abs); measured = passes, "
                          "worst scaled error " + std::to_string(worst)});
  }

  {  // LP and permutation paths agree
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      Rng rng(derive_seed(seed, {6, std::uint64_t(t)}));
      const Eigen::Index n = 2 + t % 5;
      const auto p = random_cloud(rng, n, 3.0), q = random_cloud(rng, n, 3.0);
      const double lp = ot::exact_wd_discrete(p, q);
      const double perm = ot::exact_wd_discrete(p, q, ot::SquaredEuclidean{},
                                                ot::OracleMethod::Permutation);
      worst = std::max(worst, std::abs(lp - perm));
    }
    rep.checks.push_back({"lp_vs_permutation", worst <= 1e-9, worst, 1e-9,
                          "max |LP - permutation| over 20 problems"});
  }

  {  // 1-D quantile oracle against the Gaussian closed form
    Rng rng(derive_seed(seed, {7}));
    std::normal_distribution<double> a(0.0, 1.0), b(2.0, 1.0);
    std::vector<double> xs(20000), ys(20000);
    for (auto& x : xs) x = a(rng);
    for (auto& y : ys) y = b(rng);
    const double w2 = ot::exact_wd_1d(xs, ys, 2);
    rep.checks.push_back({"quantile_vs_gaussian", std::abs(w2 - 4.0) <= 0.1,
                          std::abs(w2 - 4.0), 0.1,
                          "W2^2 of N(0,1) vs N(2,1) from 20000 samples"});
  }

  {  // median bias shrinks with smoothing
    const std::vector<double> grid = {0.4, 0.2, 0.1, 0.05};
    std::vector<double> medians;
    for (double s : grid) {
      std::vector<double> errs;
      for (int t = 0; t < 10; ++t) {
        Rng rng(derive_seed(seed, {8, std::uint64_t(t)}));
        const auto p = random_cloud(rng, 5, 3.0), q = random_cloud(rng, 5, 3.0);
        const double exact =
            ot::exact_wd_discrete(embedded(p, map), embedded(q, map));
        const double est = estimate_discrete_wd(p, q, map, tight(s),
                                                derive_seed(seed, {9, std::uint64_t(t)}));
        errs.push_back(std::abs(est - exact));
      }
      medians.push_back(median(errs));
    }
    bool dec = true;
    std::string detail = "median |bias| at smoothing 0.4/0.2/0.1/0.05:";
    for (std::size_t i = 0; i < medians.size(); ++i) {
      detail += " " + std::to_string(medians[i]);
      if (i > 0 && !(medians[i] < medians[i - 1])) dec = false;
    }
    rep.checks.push_back({"bias_sweep", dec, medians.back(), medians.front(), detail});
  }
  return rep;
}

}  // namespace wder::harness
