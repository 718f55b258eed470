#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "betfolio/error.hpp"

namespace betfolio {

// Dense row-major matrix. Problem sizes here are tiny (tens of rows), so a
// vector-of-rows keeps the numerics transparent.
using Matrix = std::vector<std::vector<double>>;

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    fail(ErrorCode::DimensionMismatch, "dot product of vectors with different lengths");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
  return total;
}

inline std::vector<double> matvec(const Matrix& m, const std::vector<double>& x) {
  std::vector<double> y(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) y[i] = dot(m[i], x);
  return y;
}

// x' Q x for square Q.
inline double quadratic_form(const Matrix& q, const std::vector<double>& x) {
  if (q.size() != x.size())
    fail(ErrorCode::DimensionMismatch, "quadratic form dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) total += x[i] * dot(q[i], x);
  return total;
}

inline double norm2(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x * x;
  return std::sqrt(total);
}

inline double norm_inf(const std::vector<double>& v) {
  double worst = 0.0;
  for (double x : v) worst = std::max(worst, std::abs(x));
  return worst;
}

inline Matrix identity_matrix(std::size_t n) {
  Matrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

}  // namespace betfolio
