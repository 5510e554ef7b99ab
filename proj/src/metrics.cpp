#include "wpolab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wpolab {

std::string format_metric(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string metrics_row_csv(const MetricsRow& r) {
  std::ostringstream out;
  out << r.step << ',' << r.episode << ',' << format_metric(r.eval_return_mean)
      << ',' << format_metric(r.eval_return_min) << ','
      << format_metric(r.eval_return_max) << ',' << format_metric(r.critic_loss)
      << ',' << format_metric(r.kl_mean) << ',' << format_metric(r.kl_std) << ','
      << format_metric(r.alpha_mean) << ',' << format_metric(r.alpha_std) << ','
      << format_metric(r.q_grad_norm) << ',' << format_metric(r.actor_grad_norm)
      << ',' << format_metric(r.policy_sigma_mean);
  return out.str();
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics file '" + path + "'");
  out << kMetricsHeader << '\n';
  for (const MetricsRow& r : rows) out << metrics_row_csv(r) << '\n';
  if (!out) throw std::runtime_error("failed writing metrics file '" + path + "'");
}

std::vector<AggregateRow> aggregate_runs(
    const std::vector<std::vector<MetricsRow>>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_runs: no runs");
  const std::size_t n = runs.front().size();
  for (const auto& run : runs)
    if (run.size() != n)
      throw std::invalid_argument("aggregate_runs: run lengths differ");
  std::vector<AggregateRow> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    AggregateRow& row = out[i];
    row.step = runs.front()[i].step;
    double sum = 0.0;
    row.min = runs.front()[i].eval_return_mean;
    row.max = row.min;
    for (const auto& run : runs) {
      if (run[i].step != row.step)
        throw std::invalid_argument("aggregate_runs: evaluation steps differ");
      const double v = run[i].eval_return_mean;
      sum += v;
      row.min = std::min(row.min, v);
      row.max = std::max(row.max, v);
    }
    row.mean = sum / static_cast<double>(runs.size());
  }
  return out;
}

void write_aggregate_csv(const std::string& path,
                         const std::vector<AggregateRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write aggregate file '" + path + "'");
  out << "step,return_mean,return_min,return_max\n";
  for (const AggregateRow& r : rows)
    out << r.step << ',' << format_metric(r.mean) << ',' << format_metric(r.min)
        << ',' << format_metric(r.max) << '\n';
  if (!out) throw std::runtime_error("failed writing aggregate file '" + path + "'");
}

namespace {

constexpr double kW = 720, kH = 440;
constexpr double kL = 70, kR = 20, kT = 40, kB = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::vector<PlotSeries>& series) {
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("write_line_plot_svg: x/y size mismatch");
    for (double v : s.x)
      if (std::isfinite(v)) xlo = std::min(xlo, v), xhi = std::max(xhi, v);
    for (double v : s.y)
      if (std::isfinite(v)) ylo = std::min(ylo, v), yhi = std::max(yhi, v);
  }
  if (xlo > xhi) xlo = 0, xhi = 1;
  if (ylo > yhi) ylo = 0, yhi = 1;
  if (xhi == xlo) xhi = xlo + 1;
  if (yhi == ylo) yhi = ylo + 1;
  const double ypad = 0.05 * (yhi - ylo);
  ylo -= ypad;
  yhi += ypad;

  auto px = [&](double x) { return kL + (x - xlo) / (xhi - xlo) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (y - ylo) / (yhi - ylo) * (kH - kT - kB); };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plot file '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
      << "\">\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";

  for (int i = 0; i <= 4; ++i) {
    const double xv = xlo + (xhi - xlo) * i / 4.0;
    const double yv = ylo + (yhi - ylo) * i / 4.0;
    out << "<line x1=\"" << px(xv) << "\" y1=\"" << kT << "\" x2=\"" << px(xv)
        << "\" y2=\"" << kH - kB << "\" stroke=\"#dddddd\"/>\n";
    out << "<line x1=\"" << kL << "\" y1=\"" << py(yv) << "\" x2=\"" << kW - kR
        << "\" y2=\"" << py(yv) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << px(xv) << "\" y=\"" << kH - kB + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << num(xv) << "</text>\n";
    out << "<text x=\"" << kL - 6 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << num(yv) << "</text>\n";
  }
  out << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR
      << "\" height=\"" << kH - kT - kB
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kPalette[si % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    const double ly = kT + 16 + 16 * static_cast<double>(si);
    out << "<line x1=\"" << kW - kR - 150 << "\" y1=\"" << ly << "\" x2=\""
        << kW - kR - 126 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kW - kR - 120 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("failed writing plot file '" + path + "'");
}

}  // namespace wpolab
