#include <cstdio>
#include <fstream>

#include "wder/errors.hpp"
#include "wder/harness/experiments.hpp"
#include "wder/random.hpp"

namespace wder::harness {

std::vector<Fig2Row> fig2_demo(const std::vector<double>& thetas) {
  std::vector<Fig2Row> out;
  for (double theta : thetas) {
    if (!(theta >= 0)) throw DomainError("fig2: theta must be >= 0");
    ot::Matrix<double> p_pt(1, 1), q_pt(1, 1);
    p_pt(0, 0) = 0.0;
    q_pt(0, 0) = theta;
    const auto P = ot::DiscreteMeasure<double>::uniform(p_pt);
    const auto Q = ot::DiscreteMeasure<double>::uniform(q_pt);
    Fig2Row r;
    r.theta = theta;
    r.wd = ot::exact_wd_discrete(P, Q, ot::Euclidean{});
    // both measures as probability vectors over the merged support
    Eigen::VectorXd p, q;
    if (theta == 0.0) {
      p = q = Eigen::VectorXd::Ones(1);
    } else {
      p = Eigen::Vector2d(1.0, 0.0);
      q = Eigen::Vector2d(0.0, 1.0);
    }
    r.js = ot::js_divergence_categorical(p, q);
    out.push_back(r);
  }
  return out;
}

void write_fig2_csv(const fs::path& path, const std::vector<Fig2Row>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << "theta,wd,js\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.theta, r.wd, r.js);
    os << buf;
  }
}

ot::DiscreteMeasure<double> embedded(const ot::DiscreteMeasure<double>& p,
                                     const ot::FeatureMap& map) {
  ot::DiscreteMeasure<double> out;
  out.points = ot::embed(map, p.points);
  out.weights = p.weights;
  return out;
}

double estimate_discrete_wd(const ot::DiscreteMeasure<double>& p,
                            const ot::DiscreteMeasure<double>& q,
                            const ot::FeatureMap& map,
                            const ot::OtParams& params, std::uint64_t seed) {
  p.validate();
  q.validate();
  ot::ProductSampler<double> raw(p.points, p.weights, q.points, q.weights);
  const auto pot = ot::fit_potentials(raw, map, map, params, seed);
  const auto pe = embedded(p, map), qe = embedded(q, map);
  ot::ProductSampler<double> eval(pe.points, pe.weights, qe.points, qe.weights);
  Rng rng(derive_seed(seed, {0xe1}));
  const auto [xs, ys] = ot::draw_pairs(eval, params.eval_samples, rng);
  return ot::estimate_wd(pot, xs, ys, params);
}

}  // namespace wder::harness
