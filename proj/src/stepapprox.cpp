#include "finq/stepapprox.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

namespace finq {

using mp = boost::multiprecision::cpp_bin_float_50;

double legendre_poly(int l, double x) {
  if (l < 0) throw ValidationError("legendre_poly: l must be >= 0");
  if (l == 0) return 1.0;
  double pm1 = 1.0;
  double p = x;
  for (int k = 1; k < l; ++k) {
    const double next = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
    pm1 = p;
    p = next;
  }
  return p;
}

namespace {

// adaptive Simpson on [a, b]
double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  const double fa = f(a);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double fb = f(b);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 48);
}

// monomial coefficient tables of P_0..P_lmax at extended precision
std::vector<std::vector<mp>> legendre_coeff_tables(int lmax) {
  std::vector<std::vector<mp>> tab;
  tab.reserve(static_cast<size_t>(lmax) + 1);
  tab.push_back({mp(1)});
  if (lmax >= 1) tab.push_back({mp(0), mp(1)});
  for (int l = 1; l < lmax; ++l) {
    const auto& pl = tab[static_cast<size_t>(l)];
    const auto& pm = tab[static_cast<size_t>(l) - 1];
    std::vector<mp> next(static_cast<size_t>(l) + 2, mp(0));
    for (size_t k = 0; k < pl.size(); ++k) next[k + 1] += mp(2 * l + 1) * pl[k] / (l + 1);
    for (size_t k = 0; k < pm.size(); ++k) next[k] -= mp(l) * pm[k] / (l + 1);
    tab.push_back(std::move(next));
  }
  return tab;
}

}  // namespace

struct StepApproximant::Impl {
  int order = 0;
  double v_crit = 0.0;
  double v_max = 1.0;
  std::vector<std::pair<int, double>> legendre_coeffs;
  std::vector<mp> power;  // a_0..a_order on x in [-1, 1]

  double eval_x(double x) const {
    mp acc = 0;
    const mp xm(x);
    for (size_t k = power.size(); k-- > 0;) acc = acc * xm + power[k];
    return static_cast<double>(acc);
  }
};

int StepApproximant::order() const { return impl_->order; }
double StepApproximant::v_crit() const { return impl_->v_crit; }
double StepApproximant::v_max() const { return impl_->v_max; }

const std::vector<std::pair<int, double>>& StepApproximant::legendre_coeffs() const {
  return impl_->legendre_coeffs;
}

std::vector<double> StepApproximant::power_coeffs() const {
  std::vector<double> out;
  out.reserve(impl_->power.size());
  for (const mp& a : impl_->power) out.push_back(static_cast<double>(a));
  return out;
}

double StepApproximant::eval_x(double x) const { return impl_->eval_x(x); }

double StepApproximant::eval_legendre_x(double x) const {
  double acc = 0.0;
  for (const auto& [l, c] : impl_->legendre_coeffs) {
    if (c != 0.0) acc += c * legendre_poly(l, x);
  }
  return acc;
}

double StepApproximant::eval(double v) const {
  return impl_->eval_x((v - impl_->v_crit) / impl_->v_max);
}

bool StepApproximant::in_domain(double v) const { return v >= 0.0 && v <= impl_->v_max; }

std::vector<double> StepApproximant::coeffs_in_value() const {
  // sum_j a_j ((v - c)/V)^j rewritten as sum_t d_t v^t
  const int L = impl_->order;
  const mp c(impl_->v_crit);
  const mp V(impl_->v_max);
  std::vector<mp> d(static_cast<size_t>(L) + 1, mp(0));
  // binomial table
  std::vector<std::vector<mp>> binom(static_cast<size_t>(L) + 1);
  for (int j = 0; j <= L; ++j) {
    binom[static_cast<size_t>(j)].assign(static_cast<size_t>(j) + 1, mp(1));
    for (int t = 1; t < j; ++t)
      binom[static_cast<size_t>(j)][static_cast<size_t>(t)] =
          binom[static_cast<size_t>(j) - 1][static_cast<size_t>(t) - 1] +
          binom[static_cast<size_t>(j) - 1][static_cast<size_t>(t)];
  }
  for (int j = 0; j <= L; ++j) {
    const mp aj_scaled = impl_->power[static_cast<size_t>(j)] / boost::multiprecision::pow(V, j);
    for (int t = 0; t <= j; ++t) {
      d[static_cast<size_t>(t)] += aj_scaled * binom[static_cast<size_t>(j)][static_cast<size_t>(t)] *
                                   boost::multiprecision::pow(-c, j - t);
    }
  }
  std::vector<double> out;
  out.reserve(d.size());
  for (const mp& x : d) out.push_back(static_cast<double>(x));
  return out;
}

StepApproximant build_step_approximant(int order, double v_crit, double v_max) {
  if (order < 1) throw ValidationError("step approximant order must be >= 1");
  if (!(v_max > 0.0)) throw ValidationError("step approximant v_max must be > 0");

  auto impl = std::make_shared<StepApproximant::Impl>();
  impl->order = order;
  impl->v_crit = v_crit;
  impl->v_max = v_max;

  const auto tab = legendre_coeff_tables(order + 1);

  // closed-form projection coefficients
  std::vector<mp> coeff(static_cast<size_t>(order) + 1);
  coeff[0] = mp(1) / 2;
  for (int l = 1; l <= order; ++l) {
    const mp pm1_at0 = tab[static_cast<size_t>(l) - 1][0];
    const mp pp1_at0 = tab[static_cast<size_t>(l) + 1][0];
    coeff[static_cast<size_t>(l)] = (pm1_at0 - pp1_at0) / 2;
  }

  // verify every coefficient against the projection integral
  // (2l+1)/2 * int_0^1 P_l(x) dx computed by adaptive quadrature
  for (int l = 1; l <= order; ++l) {
    const double integral =
        adaptive_simpson([l](double x) { return legendre_poly(l, x); }, 0.0, 1.0, 1e-12);
    const double quad = 0.5 * (2.0 * l + 1.0) * integral;
    const double closed = static_cast<double>(coeff[static_cast<size_t>(l)]);
    if (std::fabs(quad - closed) > 1e-8) {
      throw Error("step approximant coefficient mismatch at l=" + std::to_string(l) +
                  ": closed form " + std::to_string(closed) + " vs quadrature " + std::to_string(quad));
    }
  }

  impl->legendre_coeffs.reserve(static_cast<size_t>(order) + 1);
  for (int l = 0; l <= order; ++l)
    impl->legendre_coeffs.emplace_back(l, static_cast<double>(coeff[static_cast<size_t>(l)]));

  impl->power.assign(static_cast<size_t>(order) + 1, mp(0));
  for (int l = 0; l <= order; ++l) {
    const auto& pl = tab[static_cast<size_t>(l)];
    for (size_t k = 0; k < pl.size(); ++k) impl->power[k] += coeff[static_cast<size_t>(l)] * pl[k];
  }

  StepApproximant a;
  a.impl_ = std::move(impl);
  return a;
}

}  // namespace finq
