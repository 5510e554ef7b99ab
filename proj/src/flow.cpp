#include "wpolab/flow.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wpolab {

namespace {

void check_grid(const GridDensity& d, const char* where) {
  if (d.cells < 2 || !(d.lo < d.hi) ||
      d.values.size() != static_cast<std::size_t>(d.cells))
    throw std::invalid_argument(std::string(where) + ": malformed grid density");
}

}  // namespace

double GridDensity::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * spacing();
}

GridDensity make_grid_density(double lo, double hi, int cells) {
  if (cells < 2 || !(lo < hi))
    throw std::invalid_argument("make_grid_density: bad grid");
  return GridDensity{lo, hi, cells, Vec(static_cast<std::size_t>(cells), 0.0)};
}

GridDensity discretize_gaussian(double mean, double stddev, double lo, double hi,
                                int cells) {
  GridDensity d = make_grid_density(lo, hi, cells);
  for (int i = 0; i < cells; ++i) {
    const double z = (d.center(i) - mean) / stddev;
    d.values[i] = std::exp(-0.5 * z * z) / (stddev * std::sqrt(2.0 * std::numbers::pi));
  }
  const double m = d.mass();
  if (!(m > 0.0)) throw std::invalid_argument("discretize_gaussian: zero mass on grid");
  for (double& v : d.values) v /= m;
  return d;
}

double grid_mean(const GridDensity& d) {
  check_grid(d, "grid_mean");
  double s = 0.0;
  for (int i = 0; i < d.cells; ++i) s += d.values[i] * d.center(i);
  return s * d.spacing();
}

double grid_stddev(const GridDensity& d) {
  check_grid(d, "grid_stddev");
  const double mu = grid_mean(d);
  double s = 0.0;
  for (int i = 0; i < d.cells; ++i) {
    const double c = d.center(i) - mu;
    s += d.values[i] * c * c;
  }
  return std::sqrt(s * d.spacing());
}

double expected_functional(const GridDensity& d,
                           const std::function<double(double)>& q) {
  check_grid(d, "expected_functional");
  double s = 0.0;
  for (int i = 0; i < d.cells; ++i) s += d.values[i] * q(d.center(i));
  return s * d.spacing();
}

GridDensity wasserstein_flow_step(const GridDensity& d,
                                  const std::function<double(double)>& q,
                                  double dt, SquashKind kind, double squash_scale) {
  check_grid(d, "wasserstein_flow_step");
  if (!(dt > 0.0)) throw std::invalid_argument("wasserstein_flow_step: dt must be positive");
  const double da = d.spacing();

  // interior face velocities, face i sits between cells i-1 and i
  Vec v(static_cast<std::size_t>(d.cells) + 1, 0.0);
  double vmax = 0.0;
  double q_prev = q(d.center(0));
  for (int i = 1; i < d.cells; ++i) {
    const double q_here = q(d.center(i));
    v[i] = squash_value((q_here - q_prev) / da, kind, squash_scale);
    vmax = std::max(vmax, std::abs(v[i]));
    q_prev = q_here;
  }
  if (dt * vmax > 0.5 * da)
    throw std::invalid_argument("wasserstein_flow_step: CFL violated, need dt <= " +
                                std::to_string(0.5 * da / vmax));

  Vec flux(v.size(), 0.0);
  for (int i = 1; i < d.cells; ++i)
    flux[i] = v[i] > 0.0 ? v[i] * d.values[i - 1] : v[i] * d.values[i];

  GridDensity out = d;
  for (int i = 0; i < d.cells; ++i)
    out.values[i] = d.values[i] - dt / da * (flux[i + 1] - flux[i]);
  return out;
}

GridDensity fisher_rao_flow_step(const GridDensity& d,
                                 const std::function<double(double)>& q,
                                 double dt) {
  check_grid(d, "fisher_rao_flow_step");
  if (!(dt > 0.0)) throw std::invalid_argument("fisher_rao_flow_step: dt must be positive");
  const double eq = expected_functional(d, q);
  GridDensity out = d;
  for (int i = 0; i < d.cells; ++i) {
    out.values[i] = d.values[i] * (1.0 + dt * (q(d.center(i)) - eq));
    if (out.values[i] < 0.0)
      throw std::invalid_argument("fisher_rao_flow_step: dt too large, density negative");
  }
  const double m = out.mass();
  for (double& v : out.values) v /= m;
  return out;
}

GaussianRates project_flow_to_gaussian(const GridDensity& before,
                                       const GridDensity& after, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("project_flow_to_gaussian: dt must be positive");
  return {(grid_mean(after) - grid_mean(before)) / dt,
          (grid_stddev(after) - grid_stddev(before)) / dt};
}

}  // namespace wpolab
