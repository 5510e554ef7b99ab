#include "wpolab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wpolab {

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  const double pi_quarter = std::pow(std::numbers::pi, -0.25);
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      double p1 = pi_quarter;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  // nodes come out descending; flip to ascending
  for (int i = 0; i < n / 2; ++i) {
    std::swap(rule.nodes[i], rule.nodes[n - 1 - i]);
    std::swap(rule.weights[i], rule.weights[n - 1 - i]);
  }
  return rule;
}

double gauss_expectation(double mean, double stddev, int n,
                         const std::function<double(double)>& f) {
  const QuadratureRule rule = gauss_hermite(n);
  const double sqrt2 = std::numbers::sqrt2;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += rule.weights[i] * f(mean + sqrt2 * stddev * rule.nodes[i]);
  return s / std::sqrt(std::numbers::pi);
}

double trapezoid(double lo, double hi, int m,
                 const std::function<double(double)>& f) {
  if (m < 1) throw std::invalid_argument("trapezoid: m must be >= 1");
  const double h = (hi - lo) / m;
  double s = 0.5 * (f(lo) + f(hi));
  for (int i = 1; i < m; ++i) s += f(lo + h * i);
  return s * h;
}

}  // namespace wpolab
