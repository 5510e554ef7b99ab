#pragma once

#include <string>
#include <vector>

#include "wpolab/agent.hpp"

namespace wpolab {

inline constexpr const char* kMetricsHeader =
    "step,episode,eval_return_mean,eval_return_min,eval_return_max,"
    "critic_loss,kl_mean,kl_std,alpha_mean,alpha_std,q_grad_norm,"
    "actor_grad_norm,policy_sigma_mean";

// Deterministic numeric formatting shared by every CSV we emit.
std::string format_metric(double v);

std::string metrics_row_csv(const MetricsRow& row);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

// Per-step mean/min/max of eval_return_mean across seeds. All runs must
// share the same evaluation steps.
struct AggregateRow {
  long step = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

std::vector<AggregateRow> aggregate_runs(
    const std::vector<std::vector<MetricsRow>>& runs);
void write_aggregate_csv(const std::string& path,
                         const std::vector<AggregateRow>& rows);

// Minimal static SVG line chart; one polyline per series plus axes, tick
// labels, and a legend.
struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::vector<PlotSeries>& series);

}  // namespace wpolab
