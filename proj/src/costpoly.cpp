#include "finq/costpoly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace finq {

Monomial monomial_union(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else if (a[i] > b[j]) {
      out.push_back(b[j++]);
    } else {
      out.push_back(a[i]);
      ++i;
      ++j;
    }
  }
  out.insert(out.end(), a.begin() + static_cast<ptrdiff_t>(i), a.end());
  out.insert(out.end(), b.begin() + static_cast<ptrdiff_t>(j), b.end());
  return out;
}

BitEncoding make_bit_encoding(int q, double scale) {
  if (q < 0) throw ValidationError("bit encoding q must be >= 0");
  if (!(scale > 0.0)) throw ValidationError("bit encoding scale must be > 0");
  BitEncoding enc;
  enc.q = q;
  enc.scale = scale;
  enc.weights.reserve(static_cast<size_t>(2 * q + 1));
  double sum = 0.0;
  for (int alpha = -q; alpha <= q; ++alpha) {
    const double w = std::ldexp(1.0, alpha);
    enc.weights.push_back(w);
    sum += w;
  }
  enc.v_max = sum;
  return enc;
}

BitEncoding encoding_for_network(int q, const FinancialNetwork& net) {
  const std::vector<double> v0 = linear_market_values(net);
  double vmax = 0.0;
  for (double v : v0) vmax = std::max(vmax, v);
  BitEncoding enc = make_bit_encoding(q, 1.0);
  enc.scale = vmax > 0.0 ? 1.25 * vmax / enc.v_max : 1.0;
  return enc;
}

std::vector<uint8_t> encode_value(double v, const BitEncoding& enc) {
  if (v < 0.0) throw ValidationError("encode_value: negative value " + std::to_string(v));
  const double u = v / enc.scale;
  if (u > enc.v_max * (1.0 + 1e-12))
    throw ValidationError("encode_value: value " + std::to_string(v) + " exceeds encodable maximum " +
                          std::to_string(enc.value_max()));
  // grid points are k * 2^-q for k = 0 .. 2^(2q+1)-1
  const double pitch = enc.weights.front();
  const double t = std::min(u, enc.v_max) / pitch;
  double k = std::floor(t);
  const double frac = t - k;
  if (frac > 0.5) k += 1.0;  // exact .5 ties stay on the smaller grid point
  const auto ki = static_cast<uint64_t>(k);
  std::vector<uint8_t> bits(static_cast<size_t>(enc.bits_per_value()));
  for (int b = 0; b < enc.bits_per_value(); ++b) bits[static_cast<size_t>(b)] = (ki >> b) & 1u;
  return bits;
}

std::vector<uint8_t> encode_value_clamped(double v, const BitEncoding& enc, bool* clamped) {
  const double hi = enc.value_max();
  double u = v;
  bool c = false;
  if (u < 0.0) {
    u = 0.0;
    c = true;
  } else if (u > hi) {
    u = hi;
    c = true;
  }
  if (clamped) *clamped = c;
  return encode_value(u, enc);
}

double decode_bits(std::span<const uint8_t> bits, const BitEncoding& enc) {
  if (static_cast<int>(bits.size()) != enc.bits_per_value())
    throw ValidationError("decode_bits: expected " + std::to_string(enc.bits_per_value()) +
                          " bits, got " + std::to_string(bits.size()));
  double acc = 0.0;
  for (size_t b = 0; b < bits.size(); ++b) {
    if (bits[b]) acc += enc.weights[b];
  }
  return enc.scale * acc;
}

int BooleanPolynomial::degree() const {
  size_t d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.size());
  return static_cast<int>(d);
}

void BooleanPolynomial::add(Monomial m, double coeff) {
  if (coeff == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(std::move(m), coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void BooleanPolynomial::add_scaled(const BooleanPolynomial& other, double factor) {
  if (factor == 0.0) return;
  for (const auto& [m, c] : other.terms_) add(m, factor * c);
}

void BooleanPolynomial::add_product(const BooleanPolynomial& a, const BooleanPolynomial& b,
                                    int max_degree) {
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      Monomial m = monomial_union(ma, mb);
      if (static_cast<int>(m.size()) > max_degree)
        throw DegreeOverflowError("product monomial degree " + std::to_string(m.size()) +
                                  " exceeds bound " + std::to_string(max_degree));
      add(std::move(m), ca * cb);
    }
  }
}

double BooleanPolynomial::eval(std::span<const uint8_t> bits) const {
  if (static_cast<int>(bits.size()) != num_bits_)
    throw ValidationError("eval: expected " + std::to_string(num_bits_) + " bits, got " +
                          std::to_string(bits.size()));
  double acc = 0.0;
  for (const auto& [m, c] : terms_) {
    bool all = true;
    for (uint16_t i : m) {
      if (!bits[i]) {
        all = false;
        break;
      }
    }
    if (all) acc += c;
  }
  return acc;
}

void BooleanPolynomial::prune(double rel_threshold) {
  prune_rel_ = rel_threshold;
  if (rel_threshold <= 0.0 || terms_.empty()) return;
  double cmax = 0.0;
  for (const auto& [m, c] : terms_) cmax = std::max(cmax, std::fabs(c));
  const double cut = rel_threshold * cmax;
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::fabs(it->second) < cut) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<std::pair<Monomial, double>> BooleanPolynomial::sorted_terms() const {
  std::vector<std::pair<Monomial, double>> out(terms_.begin(), terms_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::string BooleanPolynomial::dump() const {
  std::ostringstream os;
  char buf[64];
  for (const auto& [m, c] : sorted_terms()) {
    for (size_t i = 0; i < m.size(); ++i) os << m[i] << ' ';
    std::snprintf(buf, sizeof buf, "%.17g", c);
    os << ": " << buf << '\n';
  }
  return os.str();
}

BooleanPolynomial BooleanPolynomial::parse(const std::string& text, int num_bits) {
  BooleanPolynomial poly(num_bits);
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw ValidationError("polynomial dump line " + std::to_string(lineno) + " missing ':'");
    Monomial m;
    {
      std::istringstream idx(line.substr(0, colon));
      long v;
      while (idx >> v) {
        if (v < 0 || v >= num_bits)
          throw ValidationError("polynomial dump line " + std::to_string(lineno) +
                                " has index out of range: " + std::to_string(v));
        m.push_back(static_cast<uint16_t>(v));
      }
    }
    double coeff;
    std::istringstream cs(line.substr(colon + 1));
    if (!(cs >> coeff))
      throw ValidationError("polynomial dump line " + std::to_string(lineno) + " has no coefficient");
    if (!std::is_sorted(m.begin(), m.end()) || std::adjacent_find(m.begin(), m.end()) != m.end())
      throw ValidationError("polynomial dump line " + std::to_string(lineno) +
                            " monomial not sorted/unique");
    poly.add(std::move(m), coeff);
  }
  return poly;
}

std::vector<StepApproximant> build_step_approximants(int order, const FinancialNetwork& net,
                                                     const BitEncoding& enc) {
  std::vector<StepApproximant> out;
  out.reserve(static_cast<size_t>(net.n));
  for (int i = 0; i < net.n; ++i)
    out.push_back(build_step_approximant(order, net.v_crit[static_cast<size_t>(i)], enc.value_max()));
  return out;
}

BooleanPolynomial build_cost_polynomial(const FinancialNetwork& net, const BitEncoding& enc,
                                        std::span<const StepApproximant> approx,
                                        const CostPolyOptions& options) {
  if (static_cast<int>(approx.size()) != net.n)
    throw ValidationError("need one step approximant per institution");
  const int order = approx[0].order();
  for (int i = 0; i < net.n; ++i) {
    const auto& a = approx[static_cast<size_t>(i)];
    if (a.order() != order) throw ValidationError("step approximants must share one order");
    if (std::fabs(a.v_crit() - net.v_crit[static_cast<size_t>(i)]) > 1e-9 * (1.0 + std::fabs(a.v_crit())))
      throw ValidationError("approximant " + std::to_string(i) + " built for a different threshold");
    if (std::fabs(a.v_max() - enc.value_max()) > 1e-9 * enc.value_max())
      throw ValidationError("approximant " + std::to_string(i) + " built for a different value range");
  }

  const int bits_per = enc.bits_per_value();
  const int num_bits = net.n * bits_per;
  const int max_degree = 2 * order;

  const Matrix M = ownership_matrix(net);
  const std::vector<double> w = matvec(M, matvec(net.D, net.p));

  // failure-term polynomial of each institution over its own bit segment
  std::vector<BooleanPolynomial> failure_poly;
  failure_poly.reserve(static_cast<size_t>(net.n));
  for (int j = 0; j < net.n; ++j) {
    const int base = j * bits_per;
    BooleanPolynomial value(num_bits);  // v_j as a linear form of its bits
    for (int t = 0; t < bits_per; ++t)
      value.add({static_cast<uint16_t>(base + t)}, enc.scale * enc.weights[static_cast<size_t>(t)]);

    const std::vector<double> d = approx[static_cast<size_t>(j)].coeffs_in_value();
    // theta_j = sum_t d_t v_j^t, built from running powers of the linear form
    BooleanPolynomial theta(num_bits);
    BooleanPolynomial power(num_bits);
    power.add({}, 1.0);
    theta.add_scaled(power, d[0]);
    for (int t = 1; t <= order; ++t) {
      BooleanPolynomial next(num_bits);
      next.add_product(power, value, max_degree);
      power = std::move(next);
      if (d[static_cast<size_t>(t)] != 0.0) theta.add_scaled(power, d[static_cast<size_t>(t)]);
    }

    const double beta = net.beta[static_cast<size_t>(j)];
    BooleanPolynomial b(num_bits);  // beta_j * (1 - theta_j)
    b.add({}, beta);
    b.add_scaled(theta, -beta);
    failure_poly.push_back(std::move(b));
  }

  BooleanPolynomial cost(num_bits);
  for (int i = 0; i < net.n; ++i) {
    // residual_i = v_i - w_i + sum_j M[i][j] * b_j
    BooleanPolynomial residual(num_bits);
    const int base = i * bits_per;
    for (int t = 0; t < bits_per; ++t)
      residual.add({static_cast<uint16_t>(base + t)}, enc.scale * enc.weights[static_cast<size_t>(t)]);
    residual.add({}, -w[static_cast<size_t>(i)]);
    for (int j = 0; j < net.n; ++j)
      residual.add_scaled(failure_poly[static_cast<size_t>(j)], M.at(i, j));
    cost.add_product(residual, residual, max_degree);
  }

  cost.prune(options.prune_rel);
  return cost;
}

}  // namespace finq
