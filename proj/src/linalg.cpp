#include "finq/linalg.hpp"

#include <cmath>
#include <utility>

namespace finq {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  std::vector<double> y(static_cast<size_t>(m.rows), 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double acc = 0.0;
    const double* row = &m.a[static_cast<size_t>(i) * m.cols];
    for (int j = 0; j < m.cols; ++j) acc += row[j] * x[static_cast<size_t>(j)];
    y[static_cast<size_t>(i)] = acc;
  }
  return y;
}

LuFactor::LuFactor(Matrix m) : orig_(m), lu_(std::move(m)) {
  if (lu_.rows != lu_.cols) throw ValidationError("LU requires a square matrix");
  const int n = lu_.rows;
  perm_.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) perm_[static_cast<size_t>(i)] = i;

  for (int k = 0; k < n; ++k) {
    int piv = k;
    double pmax = std::fabs(lu_.at(k, k));
    for (int i = k + 1; i < n; ++i) {
      double v = std::fabs(lu_.at(i, k));
      if (v > pmax) {
        pmax = v;
        piv = i;
      }
    }
    if (pmax == 0.0) throw ValidationError("singular matrix in linear solve");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(lu_.at(k, j), lu_.at(piv, j));
      std::swap(perm_[static_cast<size_t>(k)], perm_[static_cast<size_t>(piv)]);
    }
    const double d = lu_.at(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double l = lu_.at(i, k) / d;
      lu_.at(i, k) = l;
      if (l != 0.0) {
        for (int j = k + 1; j < n; ++j) lu_.at(i, j) -= l * lu_.at(k, j);
      }
    }
  }
}

std::vector<double> LuFactor::solve_once(std::span<const double> rhs) const {
  const int n = lu_.rows;
  std::vector<double> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = rhs[static_cast<size_t>(perm_[static_cast<size_t>(i)])];
  // forward substitution (unit lower triangle)
  for (int i = 1; i < n; ++i) {
    double acc = x[static_cast<size_t>(i)];
    for (int j = 0; j < i; ++j) acc -= lu_.at(i, j) * x[static_cast<size_t>(j)];
    x[static_cast<size_t>(i)] = acc;
  }
  // back substitution
  for (int i = n - 1; i >= 0; --i) {
    double acc = x[static_cast<size_t>(i)];
    for (int j = i + 1; j < n; ++j) acc -= lu_.at(i, j) * x[static_cast<size_t>(j)];
    x[static_cast<size_t>(i)] = acc / lu_.at(i, i);
  }
  return x;
}

std::vector<double> LuFactor::solve(std::span<const double> rhs) const {
  const int n = lu_.rows;
  if (static_cast<int>(rhs.size()) != n) throw ValidationError("rhs length does not match matrix size");

  std::vector<double> x = solve_once(rhs);

  double bscale = 0.0;
  for (double v : rhs) bscale = std::max(bscale, std::fabs(v));
  if (bscale == 0.0) bscale = 1.0;

  // a couple of refinement passes; quadratic matrices this small converge fast
  for (int pass = 0; pass < 3; ++pass) {
    std::vector<double> r(static_cast<size_t>(n));
    double rmax = 0.0;
    for (int i = 0; i < n; ++i) {
      double acc = rhs[static_cast<size_t>(i)];
      for (int j = 0; j < n; ++j) acc -= orig_.at(i, j) * x[static_cast<size_t>(j)];
      r[static_cast<size_t>(i)] = acc;
      rmax = std::max(rmax, std::fabs(acc));
    }
    if (rmax <= 1e-12 * bscale) break;
    std::vector<double> dx = solve_once(r);
    for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] += dx[static_cast<size_t>(i)];
  }
  return x;
}

}  // namespace finq
