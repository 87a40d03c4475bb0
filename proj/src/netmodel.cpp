#include "finq/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace finq {

namespace {

// uniform double in [0, 1), bit-reproducible across platforms
double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

std::string idx(int i) { return std::to_string(i); }

}  // namespace

FinancialNetwork FinancialNetwork::create(Matrix D, Matrix C, std::vector<double> p,
                                          std::vector<double> v_crit, std::vector<double> beta) {
  FinancialNetwork net;
  net.n = C.rows;
  net.m = D.cols;
  net.D = std::move(D);
  net.C = std::move(C);
  net.p = std::move(p);
  net.v_crit = std::move(v_crit);
  net.beta = std::move(beta);
  net.ctilde.assign(static_cast<size_t>(net.n), 0.0);
  for (int j = 0; j < net.n; ++j) {
    double colsum = 0.0;
    for (int i = 0; i < net.n; ++i) colsum += net.C.at(i, j);
    net.ctilde[static_cast<size_t>(j)] = 1.0 - colsum;
  }
  net.validate();
  return net;
}

void FinancialNetwork::validate() const {
  if (n < 1) throw ValidationError("n must be >= 1, got " + idx(n));
  if (m < 1) throw ValidationError("m must be >= 1, got " + idx(m));
  if (D.rows != n || D.cols != m)
    throw ValidationError("D must be " + idx(n) + "x" + idx(m) + ", got " + idx(D.rows) + "x" + idx(D.cols));
  if (C.rows != n || C.cols != n)
    throw ValidationError("C must be " + idx(n) + "x" + idx(n) + ", got " + idx(C.rows) + "x" + idx(C.cols));
  if (static_cast<int>(ctilde.size()) != n) throw ValidationError("ctilde must have length n");
  if (static_cast<int>(p.size()) != m) throw ValidationError("p must have length m");
  if (static_cast<int>(v_crit.size()) != n) throw ValidationError("v_crit must have length n");
  if (static_cast<int>(beta.size()) != n) throw ValidationError("beta must have length n");

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double c = C.at(i, j);
      if (!(c >= 0.0)) throw ValidationError("C[" + idx(i) + "][" + idx(j) + "] is negative: " + std::to_string(c));
      if (i == j && c != 0.0) throw ValidationError("C[" + idx(i) + "][" + idx(i) + "] must be exactly 0");
    }
  }
  for (int j = 0; j < n; ++j) {
    double colsum = 0.0;
    for (int i = 0; i < n; ++i) colsum += C.at(i, j);
    if (!(colsum < 1.0))
      throw ValidationError("column sum of C at column " + idx(j) + " is " + std::to_string(colsum) + ", must be < 1");
    const double expect = 1.0 - colsum;
    if (std::fabs(ctilde[static_cast<size_t>(j)] - expect) > 1e-12)
      throw ValidationError("ctilde[" + idx(j) + "] inconsistent with column sum of C");
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) {
      const double d = D.at(i, k);
      if (!(d >= 0.0)) throw ValidationError("D[" + idx(i) + "][" + idx(k) + "] is negative: " + std::to_string(d));
    }
  }
  for (int k = 0; k < m; ++k) {
    double colsum = 0.0;
    for (int i = 0; i < n; ++i) colsum += D.at(i, k);
    if (colsum > 1.0 + 1e-12)
      throw ValidationError("column sum of D at column " + idx(k) + " is " + std::to_string(colsum) + ", must be <= 1");
  }
  for (int k = 0; k < m; ++k) {
    if (!(p[static_cast<size_t>(k)] >= 0.0))
      throw ValidationError("p[" + idx(k) + "] is negative: " + std::to_string(p[static_cast<size_t>(k)]));
  }
  for (int i = 0; i < n; ++i) {
    if (!(beta[static_cast<size_t>(i)] >= 0.0))
      throw ValidationError("beta[" + idx(i) + "] is negative: " + std::to_string(beta[static_cast<size_t>(i)]));
    if (!std::isfinite(v_crit[static_cast<size_t>(i)]))
      throw ValidationError("v_crit[" + idx(i) + "] is not finite");
  }
}

int EquilibriumState::failure_count() const {
  int c = 0;
  for (uint8_t f : failed) c += f ? 1 : 0;
  return c;
}

const char* policy_name(EquilibriumPolicy p) {
  switch (p) {
    case EquilibriumPolicy::FromAbove: return "above";
    case EquilibriumPolicy::FromBelow: return "below";
    case EquilibriumPolicy::WorstOverEnumeration: return "worst";
  }
  return "?";
}

EquilibriumPolicy policy_from_name(const std::string& name) {
  if (name == "above") return EquilibriumPolicy::FromAbove;
  if (name == "below") return EquilibriumPolicy::FromBelow;
  if (name == "worst") return EquilibriumPolicy::WorstOverEnumeration;
  throw ValidationError("unknown equilibrium policy: " + name);
}

namespace {

Matrix eye_minus_c(const FinancialNetwork& net) {
  Matrix a = Matrix::identity(net.n);
  for (int i = 0; i < net.n; ++i)
    for (int j = 0; j < net.n; ++j) a.at(i, j) -= net.C.at(i, j);
  return a;
}

// v = Ctilde (I - C)^-1 rhs
std::vector<double> scaled_solve(const FinancialNetwork& net, const LuFactor& lu,
                                 std::span<const double> rhs) {
  std::vector<double> v = lu.solve(rhs);
  for (int i = 0; i < net.n; ++i) v[static_cast<size_t>(i)] *= net.ctilde[static_cast<size_t>(i)];
  return v;
}

std::vector<uint8_t> failure_pattern(const FinancialNetwork& net, std::span<const double> v) {
  std::vector<uint8_t> f(static_cast<size_t>(net.n), 0);
  for (int i = 0; i < net.n; ++i)
    f[static_cast<size_t>(i)] = v[static_cast<size_t>(i)] < net.v_crit[static_cast<size_t>(i)] ? 1 : 0;
  return f;
}

}  // namespace

std::vector<double> linear_market_values(const FinancialNetwork& net) {
  const LuFactor lu(eye_minus_c(net));
  return scaled_solve(net, lu, matvec(net.D, net.p));
}

std::vector<double> ownership_transform(const FinancialNetwork& net, std::span<const double> rhs) {
  const LuFactor lu(eye_minus_c(net));
  return scaled_solve(net, lu, rhs);
}

Matrix ownership_matrix(const FinancialNetwork& net) {
  const LuFactor lu(eye_minus_c(net));
  Matrix m(net.n, net.n);
  std::vector<double> e(static_cast<size_t>(net.n), 0.0);
  for (int j = 0; j < net.n; ++j) {
    e[static_cast<size_t>(j)] = 1.0;
    const std::vector<double> col = scaled_solve(net, lu, e);
    for (int i = 0; i < net.n; ++i) m.at(i, j) = col[static_cast<size_t>(i)];
    e[static_cast<size_t>(j)] = 0.0;
  }
  return m;
}

std::vector<double> exact_failure_term(const FinancialNetwork& net, std::span<const double> v) {
  std::vector<double> b(static_cast<size_t>(net.n), 0.0);
  for (int i = 0; i < net.n; ++i) {
    if (v[static_cast<size_t>(i)] < net.v_crit[static_cast<size_t>(i)])
      b[static_cast<size_t>(i)] = net.beta[static_cast<size_t>(i)];
  }
  return b;
}

double equilibrium_residual(const FinancialNetwork& net, std::span<const double> v) {
  const LuFactor lu(eye_minus_c(net));
  std::vector<double> rhs = matvec(net.D, net.p);
  const std::vector<double> b = exact_failure_term(net, v);
  for (int i = 0; i < net.n; ++i) rhs[static_cast<size_t>(i)] -= b[static_cast<size_t>(i)];
  const std::vector<double> w = scaled_solve(net, lu, rhs);
  double acc = 0.0;
  for (int i = 0; i < net.n; ++i) {
    const double d = v[static_cast<size_t>(i)] - w[static_cast<size_t>(i)];
    acc += d * d;
  }
  return acc;
}

EquilibriumState fixed_point_equilibrium(const FinancialNetwork& net, FixedPointStart start,
                                         int max_iter, double tol) {
  if (max_iter == 0) max_iter = net.n + 2;
  if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (!(tol > 0.0)) throw ValidationError("tol must be > 0");

  const LuFactor lu(eye_minus_c(net));
  const std::vector<double> dp = matvec(net.D, net.p);

  auto step = [&](std::span<const double> b) {
    std::vector<double> rhs(dp);
    for (int i = 0; i < net.n; ++i) rhs[static_cast<size_t>(i)] -= b[static_cast<size_t>(i)];
    return scaled_solve(net, lu, rhs);
  };

  std::vector<double> v = start == FixedPointStart::FromAbove
                              ? step(std::vector<double>(static_cast<size_t>(net.n), 0.0))
                              : step(net.beta);

  EquilibriumState best;
  best.values = v;
  best.failed = failure_pattern(net, v);
  best.residual = equilibrium_residual(net, v);

  for (int it = 0; it < max_iter; ++it) {
    const std::vector<double> b = exact_failure_term(net, v);
    std::vector<double> next = step(b);
    const std::vector<double> bnext = exact_failure_term(net, next);
    if (bnext == b) {
      // failure set is a fixed point; the defect is pure linear-solve error
      EquilibriumState out;
      out.values = std::move(next);
      out.failed = failure_pattern(net, out.values);
      out.residual = equilibrium_residual(net, out.values);
      if (out.residual <= tol) return out;
      if (out.residual < best.residual) best = out;
      break;
    }
    v = std::move(next);
    const double res = equilibrium_residual(net, v);
    if (res < best.residual) {
      best.values = v;
      best.failed = failure_pattern(net, v);
      best.residual = res;
    }
  }
  throw ConvergenceError("fixed-point iteration did not reach residual <= " + std::to_string(tol) +
                             " within " + std::to_string(max_iter) + " iterations",
                         std::move(best));
}

std::vector<EquilibriumState> enumerate_equilibria(const FinancialNetwork& net) {
  if (net.n > 20)
    throw SizeError("enumerate_equilibria enumerates 2^n subsets; n = " + idx(net.n) + " exceeds the cap of 20");

  const LuFactor lu(eye_minus_c(net));
  const std::vector<double> v_empty = scaled_solve(net, lu, matvec(net.D, net.p));

  // column i of M = Ctilde (I - C)^-1, scaled by beta_i: the value drop
  // caused by institution i failing
  std::vector<std::vector<double>> drop(static_cast<size_t>(net.n));
  for (int i = 0; i < net.n; ++i) {
    std::vector<double> e(static_cast<size_t>(net.n), 0.0);
    e[static_cast<size_t>(i)] = 1.0;
    std::vector<double> col = scaled_solve(net, lu, e);
    for (double& x : col) x *= net.beta[static_cast<size_t>(i)];
    drop[static_cast<size_t>(i)] = std::move(col);
  }

  std::vector<EquilibriumState> out;
  const uint32_t total = 1u << net.n;
  std::vector<double> v(v_empty);
  uint32_t mask = 0;  // Gray-code walk; v tracks v_empty - sum of drops in mask
  for (uint32_t counter = 0;; ++counter) {
    bool consistent = true;
    for (int i = 0; i < net.n; ++i) {
      const bool in_set = (mask >> i) & 1u;
      const bool fails = v[static_cast<size_t>(i)] < net.v_crit[static_cast<size_t>(i)];
      if (in_set != fails) {
        consistent = false;
        break;
      }
    }
    if (consistent) {
      // recompute without incremental drift before reporting
      std::vector<double> exact(v_empty);
      for (int i = 0; i < net.n; ++i) {
        if ((mask >> i) & 1u) {
          for (int r = 0; r < net.n; ++r)
            exact[static_cast<size_t>(r)] -= drop[static_cast<size_t>(i)][static_cast<size_t>(r)];
        }
      }
      EquilibriumState st;
      st.values = std::move(exact);
      st.failed = failure_pattern(net, st.values);
      st.residual = equilibrium_residual(net, st.values);
      out.push_back(std::move(st));
    }
    if (counter + 1 == total) break;
    const uint32_t next_gray = (counter + 1) ^ ((counter + 1) >> 1);
    const uint32_t flip = next_gray ^ mask;
    const int bit = std::countr_zero(flip);
    const double sign = (next_gray >> bit) & 1u ? -1.0 : 1.0;
    for (int r = 0; r < net.n; ++r)
      v[static_cast<size_t>(r)] += sign * drop[static_cast<size_t>(bit)][static_cast<size_t>(r)];
    mask = next_gray;
  }

  std::stable_sort(out.begin(), out.end(), [](const EquilibriumState& a, const EquilibriumState& b) {
    return a.failure_count() < b.failure_count();
  });
  return out;
}

FinancialNetwork random_network(const RandomNetworkParams& params) {
  if (params.n < 1) throw ValidationError("n must be >= 1");
  if (params.m < 1) throw ValidationError("m must be >= 1");
  if (!(params.min_self_ownership > 0.0 && params.min_self_ownership <= 1.0))
    throw ValidationError("min_self_ownership must be in (0, 1]");
  if (!(params.price_min >= 0.0 && params.price_max >= params.price_min))
    throw ValidationError("invalid price range");
  if (!(params.theta >= 0.0)) throw ValidationError("theta must be >= 0");
  if (!(params.beta_frac >= 0.0)) throw ValidationError("beta_frac must be >= 0");

  std::mt19937_64 rng(params.seed);
  const int n = params.n;
  const int m = params.m;

  Matrix C(n, n);
  std::vector<double> w(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      w[static_cast<size_t>(i)] = i == j ? 0.0 : uniform01(rng);
      sum += w[static_cast<size_t>(i)];
    }
    const double total = uniform01(rng) * (1.0 - params.min_self_ownership);
    if (sum > 0.0) {
      for (int i = 0; i < n; ++i) C.at(i, j) = w[static_cast<size_t>(i)] / sum * total;
    }
  }

  Matrix D(n, m);
  for (int k = 0; k < m; ++k) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      w[static_cast<size_t>(i)] = uniform01(rng);
      sum += w[static_cast<size_t>(i)];
    }
    const double total = uniform01(rng);
    if (sum > 0.0) {
      for (int i = 0; i < n; ++i) D.at(i, k) = w[static_cast<size_t>(i)] / sum * total;
    }
  }

  std::vector<double> p(static_cast<size_t>(m));
  for (int k = 0; k < m; ++k)
    p[static_cast<size_t>(k)] = params.price_min + uniform01(rng) * (params.price_max - params.price_min);

  FinancialNetwork net = FinancialNetwork::create(
      std::move(D), std::move(C), std::move(p), std::vector<double>(static_cast<size_t>(n), 0.0),
      std::vector<double>(static_cast<size_t>(n), 0.0));

  // thresholds relative to the unshocked linear values, losses relative to
  // unshocked asset holdings
  const std::vector<double> v0 = linear_market_values(net);
  const std::vector<double> dp = matvec(net.D, net.p);
  for (int i = 0; i < n; ++i) {
    net.v_crit[static_cast<size_t>(i)] = params.theta * v0[static_cast<size_t>(i)];
    net.beta[static_cast<size_t>(i)] = params.beta_frac * dp[static_cast<size_t>(i)];
  }
  net.validate();
  return net;
}

FinancialNetwork apply_perturbation(const FinancialNetwork& net, const PerturbationSpec& spec) {
  FinancialNetwork out = net;
  std::mt19937_64 rng(spec.seed);
  for (int k = 0; k < net.m; ++k) {
    const double u = spec.amplitude * uniform01(rng);
    out.p[static_cast<size_t>(k)] = std::max(0.0, net.p[static_cast<size_t>(k)] - u);
  }
  return out;
}

std::vector<SweepRow> failure_sweep(const FinancialNetwork& net, std::span<const double> amplitudes,
                                    EquilibriumPolicy policy, uint64_t seed) {
  for (size_t i = 1; i < amplitudes.size(); ++i) {
    if (amplitudes[i] < amplitudes[i - 1]) throw ValidationError("amplitudes must be sorted ascending");
  }

  std::vector<SweepRow> rows;
  rows.reserve(amplitudes.size());
  for (size_t row = 0; row < amplitudes.size(); ++row) {
    SweepRow r;
    r.amplitude = amplitudes[row];
    r.policy = policy;
    r.seed = seed ^ static_cast<uint64_t>(row);
    const FinancialNetwork shocked = apply_perturbation(net, {r.amplitude, r.seed});
    try {
      if (policy == EquilibriumPolicy::WorstOverEnumeration) {
        const auto states = enumerate_equilibria(shocked);
        int worst = 0;
        for (const auto& st : states) worst = std::max(worst, st.failure_count());
        r.failure_count = worst;
      } else {
        const auto st = fixed_point_equilibrium(
            shocked, policy == EquilibriumPolicy::FromAbove ? FixedPointStart::FromAbove
                                                            : FixedPointStart::FromBelow);
        r.failure_count = st.failure_count();
      }
    } catch (const ConvergenceError& e) {
      r.converged = false;
      r.failure_count = e.best_state.failure_count();
    }
    rows.push_back(r);
  }
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "amplitude,failure_count,policy,converged,seed\n";
  for (const SweepRow& r : rows) {
    os << r.amplitude << ',' << r.failure_count << ',' << policy_name(r.policy) << ','
       << (r.converged ? "true" : "false") << ',' << r.seed << '\n';
  }
  return os.str();
}

namespace {

std::vector<double> require_number_array(const nlohmann::json& j, const std::string& key, size_t len) {
  if (!j.contains(key)) throw ValidationError("network file missing key '" + key + "'");
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw ValidationError("network key '" + key + "' must be an array");
  if (arr.size() != len)
    throw ValidationError("network key '" + key + "' has length " + std::to_string(arr.size()) +
                          ", expected " + std::to_string(len));
  std::vector<double> out;
  out.reserve(len);
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number())
      throw ValidationError("network key '" + key + "' entry " + std::to_string(i) + " is not a number");
    out.push_back(arr[i].get<double>());
  }
  return out;
}

}  // namespace

FinancialNetwork read_network_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open network file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("network file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ValidationError("network file must contain a JSON object");
  if (!j.contains("n") || !j.at("n").is_number_integer()) throw ValidationError("network file missing integer 'n'");
  if (!j.contains("m") || !j.at("m").is_number_integer()) throw ValidationError("network file missing integer 'm'");
  const int n = j.at("n").get<int>();
  const int m = j.at("m").get<int>();
  if (n < 1 || m < 1) throw ValidationError("network file has non-positive n or m");

  Matrix D(n, m);
  D.a = require_number_array(j, "D", static_cast<size_t>(n) * m);
  Matrix C(n, n);
  C.a = require_number_array(j, "C", static_cast<size_t>(n) * n);
  return FinancialNetwork::create(std::move(D), std::move(C),
                                  require_number_array(j, "p", static_cast<size_t>(m)),
                                  require_number_array(j, "v_crit", static_cast<size_t>(n)),
                                  require_number_array(j, "beta", static_cast<size_t>(n)));
}

void write_network_json(const FinancialNetwork& net, const std::string& path,
                        const std::string& config_json) {
  nlohmann::json j;
  j["n"] = net.n;
  j["m"] = net.m;
  j["D"] = net.D.a;
  j["C"] = net.C.a;
  j["p"] = net.p;
  j["v_crit"] = net.v_crit;
  j["beta"] = net.beta;
  if (!config_json.empty()) j["config"] = nlohmann::json::parse(config_json);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write network file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace finq
