#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpolab {

using Vec = std::vector<double>;

inline void check_same_size(const Vec& a, const Vec& b, const char* where) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(where) + ": size mismatch " +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
}

inline double dot(const Vec& a, const Vec& b) {
  check_same_size(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline void axpy(double alpha, const Vec& x, Vec& y) {
  check_same_size(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(Vec& a, double s) {
  for (double& v : a) v *= s;
}

inline bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline double mean_of(const Vec& a) {
  if (a.empty()) throw std::invalid_argument("mean_of: empty vector");
  double s = 0.0;
  for (double v : a) s += v;
  return s / static_cast<double>(a.size());
}

}  // namespace wpolab
