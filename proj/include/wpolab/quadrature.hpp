#pragma once

#include <functional>
#include <vector>

namespace wpolab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Hermite rule for the weight exp(-x^2): exact for polynomials of
// degree <= 2n - 1. Nodes by Newton iteration on the Hermite recurrence.
QuadratureRule gauss_hermite(int n);

// E[f(a)] for a ~ N(mean, stddev^2) through an n-point Hermite rule.
double gauss_expectation(double mean, double stddev, int n,
                         const std::function<double(double)>& f);

// Composite trapezoid over [lo, hi] with m uniform intervals.
double trapezoid(double lo, double hi, int m,
                 const std::function<double(double)>& f);

}  // namespace wpolab
