#include "finq/kernels.hpp"

#include <atomic>

#include "finq/errors.hpp"

namespace finq::kernels {

namespace detail {

double dot_scalar(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, std::span<const double> x, std::span<double> y) {
  const size_t n = x.size();
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double coupling_energy_scalar(std::span<const double> vals, std::span<const int32_t> ia,
                              std::span<const int32_t> ja, std::span<const double> s) {
  double acc = 0.0;
  const size_t m = vals.size();
  for (size_t e = 0; e < m; ++e) {
    acc += vals[e] * s[static_cast<size_t>(ia[e])] * s[static_cast<size_t>(ja[e])];
  }
  return acc;
}

#if defined(__x86_64__) || defined(_M_X64)
// implemented in kernels_avx2.cpp, compiled with -mavx2 -mfma
double dot_avx2(std::span<const double> a, std::span<const double> b);
void axpy_avx2(double alpha, std::span<const double> x, std::span<double> y);
double coupling_energy_avx2(std::span<const double> vals, std::span<const int32_t> ia,
                            std::span<const int32_t> ja, std::span<const double> s);
#endif

}  // namespace detail

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Backend> g_backend{cpu_has_avx2() ? Backend::avx2 : Backend::scalar};

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

bool backend_supported(Backend b) {
  return b == Backend::scalar || (b == Backend::avx2 && cpu_has_avx2());
}

void set_backend(Backend b) {
  if (!backend_supported(b)) throw ValidationError("requested kernel backend not supported on this CPU");
  g_backend.store(b, std::memory_order_relaxed);
}

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

double dot(std::span<const double> a, std::span<const double> b) {
#if defined(__x86_64__) || defined(_M_X64)
  if (active_backend() == Backend::avx2) return detail::dot_avx2(a, b);
#endif
  return detail::dot_scalar(a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
#if defined(__x86_64__) || defined(_M_X64)
  if (active_backend() == Backend::avx2) return detail::axpy_avx2(alpha, x, y);
#endif
  detail::axpy_scalar(alpha, x, y);
}

double coupling_energy(std::span<const double> vals, std::span<const int32_t> ia,
                       std::span<const int32_t> ja, std::span<const double> s) {
#if defined(__x86_64__) || defined(_M_X64)
  if (active_backend() == Backend::avx2) return detail::coupling_energy_avx2(vals, ia, ja, s);
#endif
  return detail::coupling_energy_scalar(vals, ia, ja, s);
}

}  // namespace finq::kernels
