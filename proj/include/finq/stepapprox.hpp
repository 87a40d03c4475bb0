#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "finq/errors.hpp"

namespace finq {

// P_l(x) by the Bonnet three-term recurrence.
double legendre_poly(int l, double x);

// Truncated Fourier-Legendre series of the unit step on [-1, 1], rescaled to
// market values through x = (v - v_crit) / v_max. Coefficients:
//   c_0 = 1/2,  c_l = (P_{l-1}(0) - P_{l+1}(0)) / 2   for l >= 1
// (all even l >= 2 vanish). The monomial-basis form is kept at extended
// precision internally; the Legendre-to-monomial conversion is badly
// conditioned above order ~20 and plain doubles would lose the tail orders.
class StepApproximant {
 public:
  int order() const;
  double v_crit() const;
  double v_max() const;

  // (l, c_l) for l = 0..order
  const std::vector<std::pair<int, double>>& legendre_coeffs() const;

  // Monomial coefficients a_0..a_order rounded to double; export/debug view.
  // Evaluation goes through eval_x, which keeps the extended precision.
  std::vector<double> power_coeffs() const;

  // Power-basis value at x in [-1, 1].
  double eval_x(double x) const;

  // Legendre-basis value at the same point; independent evaluation path
  // used for cross-checks.
  double eval_legendre_x(double x) const;

  // eval_x at x = (v - v_crit) / v_max.
  double eval(double v) const;

  // The approximation domain is v in [0, v_max]; values outside are still
  // evaluated, callers flag them.
  bool in_domain(double v) const;

  // Coefficients d_0..d_order of the same polynomial written directly in v:
  // eval(v) = sum_t d_t v^t. Accurate as doubles only for the small orders
  // the compile pipeline uses (r <= ~10).
  std::vector<double> coeffs_in_value() const;

 private:
  StepApproximant() = default;
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  friend StepApproximant build_step_approximant(int order, double v_crit, double v_max);
};

// Builds the approximant and verifies every closed-form coefficient against
// an adaptive-quadrature projection integral; a disagreement beyond 1e-8
// throws (it would mean an implementation bug, not bad input).
StepApproximant build_step_approximant(int order, double v_crit, double v_max);

}  // namespace finq
