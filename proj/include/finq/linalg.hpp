#pragma once

#include <span>
#include <vector>

#include "finq/errors.hpp"

namespace finq {

// Dense row-major matrix. Small sizes only; the networks this library deals
// with have at most a few hundred institutions.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static Matrix identity(int n);
};

std::vector<double> matvec(const Matrix& m, std::span<const double> x);

// LU factorization with partial pivoting. solve() applies iterative
// refinement against the original matrix until the residual drops below
// 1e-12 relative to the right-hand side (at most a few passes). The matrix
// is never explicitly inverted.
class LuFactor {
 public:
  // Throws ValidationError if the matrix is not square or is singular to
  // working precision.
  explicit LuFactor(Matrix m);

  std::vector<double> solve(std::span<const double> rhs) const;

  int size() const { return orig_.rows; }

 private:
  std::vector<double> solve_once(std::span<const double> rhs) const;

  Matrix orig_;
  Matrix lu_;
  std::vector<int> perm_;
};

}  // namespace finq
