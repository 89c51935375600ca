#ifndef SGM_VECTOR_OPS_HPP
#define SGM_VECTOR_OPS_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sgm/errors.hpp"

namespace sgm {

using Vector = std::vector<double>;

inline void require_same_size(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw DimensionError(std::string(where) + ": size mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, std::span<double> x) {
  for (auto& v : x) v *= alpha;
}

inline Vector scaled(double alpha, std::span<const double> x) {
  Vector y(x.begin(), x.end());
  scale(alpha, y);
  return y;
}

inline Vector difference(std::span<const double> x, std::span<const double> y) {
  require_same_size(x.size(), y.size(), "difference");
  Vector d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  return d;
}

/// Normalizes in place; returns the norm before scaling.
inline double normalize(std::span<double> x) {
  const double n = norm2(x);
  if (n > 0.0) scale(1.0 / n, x);
  return n;
}

/// Removes from x its components along the (Euclidean orthonormal) vectors
/// in `basis`, two passes of classical Gram-Schmidt.
inline void project_out(std::span<const Vector> basis, std::span<double> x) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis) axpy(-dot(q, x), q, x);
  }
}

} // namespace sgm

#endif // SGM_VECTOR_OPS_HPP
