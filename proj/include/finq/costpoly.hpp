#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "finq/errors.hpp"
#include "finq/monomial.hpp"
#include "finq/netmodel.hpp"
#include "finq/stepapprox.hpp"

namespace finq {

// A multilinear product exceeded the expected degree bound; only reachable
// through an internal reduction bug.
class DegreeOverflowError : public Error {
 public:
  using Error::Error;
};

// Fixed-point binary encoding of one market value:
//   v = scale * sum_{alpha=-q..q} x_alpha 2^alpha
// Bit t of an institution's segment carries weight 2^(t-q), so weights are
// strictly increasing and v_max = 2^(q+1) - 2^(-q) in encoded units.
struct BitEncoding {
  int q = 0;
  std::vector<double> weights;  // 2^alpha, alpha = -q..q
  double scale = 1.0;           // currency per encoded unit
  double v_max = 0.0;           // sum of weights (encoded units)

  int bits_per_value() const { return 2 * q + 1; }
  double value_max() const { return scale * v_max; }          // currency
  double resolution() const { return scale * weights.front(); }  // grid pitch
};

BitEncoding make_bit_encoding(int q, double scale);

// scale chosen so 1.25x the largest linear market value maps to the top of
// the encodable range, leaving headroom above the unshocked equilibrium.
BitEncoding encoding_for_network(int q, const FinancialNetwork& net);

// Nearest grid point; ties round toward the smaller encoded value. Throws
// ValidationError when v < 0 or v exceeds the encodable maximum.
std::vector<uint8_t> encode_value(double v, const BitEncoding& enc);

// Clamps into [0, value_max] first; *clamped reports whether clamping fired.
std::vector<uint8_t> encode_value_clamped(double v, const BitEncoding& enc, bool* clamped = nullptr);

double decode_bits(std::span<const uint8_t> bits, const BitEncoding& enc);

// Multilinear pseudo-Boolean polynomial: sorted index tuples -> coefficients.
class BooleanPolynomial {
 public:
  using TermMap = std::unordered_map<Monomial, double, MonomialHash>;

  explicit BooleanPolynomial(int num_bits) : num_bits_(num_bits) {}

  int num_bits() const { return num_bits_; }
  const TermMap& terms() const { return terms_; }
  size_t term_count() const { return terms_.size(); }
  int degree() const;

  // m must be sorted and duplicate-free; accumulates into the existing term.
  void add(Monomial m, double coeff);
  void add_scaled(const BooleanPolynomial& other, double factor);

  // this += a * b with multilinear folding; any product monomial above
  // max_degree throws DegreeOverflowError.
  void add_product(const BooleanPolynomial& a, const BooleanPolynomial& b, int max_degree);

  double eval(std::span<const uint8_t> bits) const;

  // Drops terms with |coeff| < rel_threshold * max |coeff|.
  void prune(double rel_threshold);
  double prune_threshold() const { return prune_rel_; }

  // Deterministic order: lexicographic by index tuple.
  std::vector<std::pair<Monomial, double>> sorted_terms() const;

  // Text dump, one term per line: "i1 i2 ... ik : coefficient" with an empty
  // index list for the constant.
  std::string dump() const;
  static BooleanPolynomial parse(const std::string& text, int num_bits);

 private:
  int num_bits_ = 0;
  TermMap terms_;
  double prune_rel_ = 0.0;
};

struct CostPolyOptions {
  double prune_rel = 1e-12;
};

// Step approximants of the given order, one per institution, on the domain
// (v_crit_i, value_max of the encoding).
std::vector<StepApproximant> build_step_approximants(int order, const FinancialNetwork& net,
                                                     const BitEncoding& enc);

// The squared equilibrium defect as a polynomial over all n*(2q+1) bits,
// with the failure step replaced by each institution's polynomial
// approximant. Institution i owns bits [i*(2q+1), (i+1)*(2q+1)), weight
// 2^(t-q) on local bit t.
BooleanPolynomial build_cost_polynomial(const FinancialNetwork& net, const BitEncoding& enc,
                                        std::span<const StepApproximant> approx,
                                        const CostPolyOptions& options = {});

}  // namespace finq
