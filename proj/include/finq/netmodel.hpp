#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "finq/errors.hpp"
#include "finq/linalg.hpp"

namespace finq {

// Cross-holding financial network.
//
//   n institutions, m assets
//   D[i][k] — fraction of asset k owned by institution i
//   C[i][j] — fraction of institution j owned by institution i, C[i][i] = 0
//   ctilde[j] = 1 - sum_i C[i][j]  — self-ownership of institution j
//   p — asset prices
//   v_crit — failure thresholds, beta — extra loss on failure
//
// Market values at equilibrium satisfy
//   v = Ctilde (I - C)^-1 (D p - b(v, p)),  b_i = beta_i when v_i < v_crit_i.
struct FinancialNetwork {
  int n = 0;
  int m = 0;
  Matrix D;                     // n x m
  Matrix C;                     // n x n
  std::vector<double> ctilde;   // n
  std::vector<double> p;        // m
  std::vector<double> v_crit;   // n
  std::vector<double> beta;     // n

  // Builds ctilde from C and validates all invariants.
  static FinancialNetwork create(Matrix D, Matrix C, std::vector<double> p,
                                 std::vector<double> v_crit, std::vector<double> beta);

  // Throws ValidationError naming the first violated invariant with indices.
  void validate() const;
};

struct EquilibriumState {
  std::vector<double> values;
  std::vector<uint8_t> failed;    // failed[i] <=> values[i] < v_crit[i]
  double residual = 0.0;          // squared equilibrium defect, exact step function

  int failure_count() const;
};

enum class FixedPointStart { FromAbove, FromBelow };
enum class EquilibriumPolicy { FromAbove, FromBelow, WorstOverEnumeration };

const char* policy_name(EquilibriumPolicy p);
EquilibriumPolicy policy_from_name(const std::string& name);

// Price shock: subtract a uniform random vector with entries in [0, amplitude]
// from the asset prices, clamping at zero.
struct PerturbationSpec {
  double amplitude = 0.0;
  uint64_t seed = 0;
};

// Fixed-point iteration failed to settle; carries the best iterate seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, EquilibriumState best)
      : Error(msg), best_state(std::move(best)) {}
  EquilibriumState best_state;
};

// Solution of the linear (no-failure) system v = Ctilde (I - C)^-1 D p.
std::vector<double> linear_market_values(const FinancialNetwork& net);

// w = Ctilde (I - C)^-1 rhs
std::vector<double> ownership_transform(const FinancialNetwork& net, std::span<const double> rhs);

// Dense M with M rhs == ownership_transform(rhs); used when many products
// against the same network are needed.
Matrix ownership_matrix(const FinancialNetwork& net);

// b_i = beta_i if v_i < v_crit_i else 0. The boundary v_i == v_crit_i does
// not count as failure (step value 1 at zero).
std::vector<double> exact_failure_term(const FinancialNetwork& net, std::span<const double> v);

// Squared norm of the equilibrium defect v - Ctilde (I-C)^-1 (Dp - b(v)),
// with the exact step function.
double equilibrium_residual(const FinancialNetwork& net, std::span<const double> v);

// Monotone fixed-point iteration of v <- Ctilde (I-C)^-1 (Dp - b(v)).
// FromAbove starts at the no-failure linear solution and converges to the
// minimum-failure equilibrium; FromBelow starts all-failed and converges to
// the maximum-failure one. Converges within n+1 sweeps; a ConvergenceError
// beyond max_iter signals an invariant violation upstream.
EquilibriumState fixed_point_equilibrium(const FinancialNetwork& net, FixedPointStart start,
                                         int max_iter = 0, double tol = 1e-9);

// Exhaustive fixed-point set: checks every candidate failure subset for
// self-consistency. Requires n <= 20. Result sorted by failure count.
std::vector<EquilibriumState> enumerate_equilibria(const FinancialNetwork& net);

struct RandomNetworkParams {
  int n = 10;
  int m = 20;
  double min_self_ownership = 0.5;
  double price_min = 0.0;
  double price_max = 100.0;
  double theta = 0.5;      // v_crit = theta * unshocked linear value
  double beta_frac = 0.8;  // beta = beta_frac * (D p) at unshocked prices
  uint64_t seed = 0;
};

// Deterministic for a fixed seed. Column entries of C are uniform weights
// renormalized to a uniform total in [0, 1 - min_self]; D columns likewise
// to a total in [0, 1].
FinancialNetwork random_network(const RandomNetworkParams& params);

// Copy of the network with p' = max(0, p - amplitude * u), u uniform in
// [0,1]^m drawn from the spec seed. Same seed with a larger amplitude scales
// the same noise vector.
FinancialNetwork apply_perturbation(const FinancialNetwork& net, const PerturbationSpec& spec);

struct SweepRow {
  double amplitude = 0.0;
  int failure_count = 0;
  EquilibriumPolicy policy = EquilibriumPolicy::FromAbove;
  bool converged = true;
  uint64_t seed = 0;
};

// One equilibrium per amplitude, each with a fresh per-row sub-seed
// (seed XOR row index). Convergence failures are recorded per row, never
// abort the sweep.
std::vector<SweepRow> failure_sweep(const FinancialNetwork& net, std::span<const double> amplitudes,
                                    EquilibriumPolicy policy, uint64_t seed);

std::string sweep_to_csv(std::span<const SweepRow> rows);

// JSON file format: object with keys n, m, D (row-major), C (row-major), p,
// v_crit, beta. Extra keys are ignored on read.
FinancialNetwork read_network_json(const std::string& path);
void write_network_json(const FinancialNetwork& net, const std::string& path,
                        const std::string& config_json = "");

}  // namespace finq
