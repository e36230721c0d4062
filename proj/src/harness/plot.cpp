#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "wder/errors.hpp"
#include "wder/harness/experiments.hpp"

namespace wder::harness {

namespace {

std::size_t tail_start(std::size_t n, double frac) {
  const auto keep = std::max<std::size_t>(1, std::size_t(std::ceil(frac * double(n))));
  return n > keep ? n - keep : 0;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

double final_return(const std::vector<MetricRow>& rows, double frac) {
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  const auto b = tail_start(rows.size(), frac);
  for (auto i = b; i < rows.size(); ++i) s += rows[i].avg_return;
  return s / double(rows.size() - b);
}

double final_pair_wd(const std::vector<MetricRow>& rows, double frac) {
  double s = 0.0;
  int n = 0;
  for (auto i = tail_start(rows.size(), frac); i < rows.size(); ++i)
    for (const auto& r : rows[i].wd)
      for (double v : r)
        if (!std::isnan(v)) {
          s += v;
          ++n;
        }
  return n ? s / n : std::numeric_limits<double>::quiet_NaN();
}

std::vector<SweepEntry> sweep(const TrainConfig& base,
                              const std::vector<double>& alphas,
                              const std::vector<std::uint64_t>& seeds) {
  std::vector<SweepEntry> out;
  const fs::path root = base.out_dir;
  fs::create_directories(root);
  for (double a : alphas)
    for (auto s : seeds) {
      TrainConfig c = base;
      c.agent.alpha = a;
      c.seed = s;
      char name[64];
      std::snprintf(name, sizeof name, "alpha_%.2f/seed_%llu", a,
                    static_cast<unsigned long long>(s));
      c.out_dir = (root / name).string();
      const auto run = train(c);
      out.push_back({a, s, final_return(run.rows), final_pair_wd(run.rows),
                     c.out_dir});
    }
  std::ofstream os(root / "summary.csv", std::ios::trunc);
  if (!os) throw IoError("cannot write sweep summary");
  os << "alpha,seed,final_return,final_wd,dir\n";
  for (const auto& e : out) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%llu,%.17g,%.17g,", e.alpha,
                  static_cast<unsigned long long>(e.seed), e.final_return,
                  e.final_wd);
    os << buf << e.dir.string() << "\n";
  }
  return out;
}

void plot_metrics(const fs::path& csv, const fs::path& svg,
                  const std::vector<std::string>& columns, int window) {
  std::ifstream is(csv);
  if (!is) throw IoError("cannot read " + csv.string());
  std::string line;
  if (!std::getline(is, line)) throw IoError(csv.string() + " is empty");
  const auto header = split(line);
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw UsageError("plot: no column '" + name + "'");
    return std::size_t(it - header.begin());
  };
  const std::size_t xcol = col("timestep");
  std::vector<std::size_t> ycols;
  for (const auto& c : columns) ycols.push_back(col(c));

  std::vector<double> xs;
  std::vector<std::vector<double>> ys(ycols.size());
  while (std::getline(is, line)) {
    const auto cells = split(line);
    if (cells.size() != header.size()) continue;
    xs.push_back(std::stod(cells[xcol]));
    for (std::size_t i = 0; i < ycols.size(); ++i)
      ys[i].push_back(std::stod(cells[ycols[i]]));
  }
  // trailing moving average, NaN entries skipped
  const int w = std::max(1, window);
  for (auto& series : ys) {
    std::vector<double> sm(series.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < series.size(); ++i) {
      double s = 0;
      int n = 0;
      for (std::size_t j = i + 1 > std::size_t(w) ? i + 1 - std::size_t(w) : 0; j <= i; ++j)
        if (!std::isnan(series[j])) {
          s += series[j];
          ++n;
        }
      if (n) sm[i] = s / n;
    }
    series = std::move(sm);
  }

  double x0 = 0, x1 = 1, y0 = std::numeric_limits<double>::infinity(),
         y1 = -std::numeric_limits<double>::infinity();
  if (!xs.empty()) {
    x0 = xs.front();
    x1 = std::max(xs.back(), x0 + 1);
  }
  for (const auto& s : ys)
    for (double v : s)
      if (!std::isnan(v)) {
        y0 = std::min(y0, v);
        y1 = std::max(y1, v);
      }
  if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  if (y1 - y0 < 1e-12) y1 = y0 + 1;

  const double W = 720, H = 400, L = 70, R = 20, T = 20, B = 50;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b"};

  std::ofstream os(svg, std::ios::trunc);
  if (!os) throw IoError("cannot write " + svg.string());
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" "
                "height=\"%g\" font-family=\"sans-serif\" font-size=\"12\">\n",
                W, H);
  os << buf;
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<path d=\"M%g %g L%g %g L%g %g\" stroke=\"black\" fill=\"none\"/>\n",
                L, T, L, H - B, W - R, H - B);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\">%.4g</text>\n<text x=\"%g\" y=\"%g\">%.4g</text>\n",
                4.0, py(y1) + 4, y1, 4.0, py(y0) + 4, y0);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\">%.6g</text>\n<text x=\"%g\" y=\"%g\" "
                "text-anchor=\"end\">%.6g</text>\n",
                L, H - B + 18, x0, W - R, H - B + 18, x1);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">timestep "
                "(window %d)</text>\n",
                (L + W - R) / 2, H - 12, w);
  os << buf;
  for (std::size_t s = 0; s < ys.size(); ++s) {
    const char* color = colors[s % 6];
    std::string d;
    bool pen = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (std::isnan(ys[s][i])) {
        pen = false;
        continue;
      }
      std::snprintf(buf, sizeof buf, "%c%.2f %.2f ", pen ? 'L' : 'M', px(xs[i]),
                    py(ys[s][i]));
      d += buf;
      pen = true;
    }
    os << "<path d=\"" << d << "\" stroke=\"" << color
       << "\" fill=\"none\" stroke-width=\"1.5\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" fill=\"%s\">", L + 10,
                  T + 14 + 14 * double(s), color);
    os << buf << columns[s] << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace wder::harness
