#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgdlab {

// Dense point in R^n. All engine arithmetic is double precision.
using Vec = std::vector<double>;

inline void check_same_dim(const Vec& a, const Vec& b, const char* where) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

inline double dot(const Vec& a, const Vec& b) {
  check_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

// y += alpha * x
inline void axpy_inplace(Vec& y, double alpha, const Vec& x) {
  check_same_dim(y, x, "axpy");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline Vec scaled(const Vec& a, double s) {
  Vec r(a);
  for (double& v : r) v *= s;
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  check_same_dim(a, b, "sub");
  Vec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

inline double linf_dist(const Vec& a, const Vec& b) {
  check_same_dim(a, b, "linf_dist");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline bool all_finite(const Vec& a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace sgdlab
