#pragma once

#include <functional>

#include "wpolab/vec.hpp"
#include "wpolab/wpo.hpp"

namespace wpolab {

// Cell-centered density on a uniform 1-d grid over [lo, hi].
struct GridDensity {
  double lo = 0.0;
  double hi = 0.0;
  int cells = 0;
  Vec values;

  double spacing() const { return (hi - lo) / cells; }
  double center(int i) const { return lo + (i + 0.5) * spacing(); }
  double mass() const;
};

GridDensity make_grid_density(double lo, double hi, int cells);
// Gaussian pdf at the cell centers, renormalized to unit mass.
GridDensity discretize_gaussian(double mean, double stddev, double lo, double hi,
                                int cells);

double grid_mean(const GridDensity& d);
double grid_stddev(const GridDensity& d);

// E_pi[q] on the grid.
double expected_functional(const GridDensity& d,
                           const std::function<double(double)>& q);

// One explicit step of d pi/dt = -d/da( pi * v ), v = squash(dQ/da), with
// donor-cell upwind fluxes and zero-flux boundaries. The face velocity is
// squash((Q(a_i) - Q(a_{i-1})) / da), which keeps the discrete E[Q] exactly
// nondecreasing. Errors when dt * max|v| > 0.5 * da (CFL).
GridDensity wasserstein_flow_step(const GridDensity& d,
                                  const std::function<double(double)>& q,
                                  double dt, SquashKind kind = SquashKind::identity,
                                  double squash_scale = 1.0);

// One explicit step of d pi/dt = (Q - E_pi[Q]) pi, renormalized to unit
// mass. Errors if any cell would go negative.
GridDensity fisher_rao_flow_step(const GridDensity& d,
                                 const std::function<double(double)>& q,
                                 double dt);

// Finite-difference rates of the projected Gaussian statistics between two
// densities dt apart: ((mean1-mean0)/dt, (stddev1-stddev0)/dt).
struct GaussianRates {
  double d_mean;
  double d_stddev;
};
GaussianRates project_flow_to_gaussian(const GridDensity& before,
                                       const GridDensity& after, double dt);

}  // namespace wpolab
