// AVX2 + FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after the runtime CPU check in
// kernels.cpp.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstdint>
#include <span>

namespace finq::kernels::detail {

double dot_avx2(std::span<const double> a, std::span<const double> b) {
  const size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc0);
  __m128d hi = _mm256_extractf128_pd(acc0, 1);
  lo = _mm_add_pd(lo, hi);
  double acc = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, std::span<const double> x, std::span<double> y) {
  const size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y.data() + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), vy);
    _mm256_storeu_pd(y.data() + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double coupling_energy_avx2(std::span<const double> vals, std::span<const int32_t> ia,
                            std::span<const int32_t> ja, std::span<const double> s) {
  const size_t m = vals.size();
  __m256d acc = _mm256_setzero_pd();
  size_t e = 0;
  for (; e + 4 <= m; e += 4) {
    const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ia.data() + e));
    const __m128i vj = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ja.data() + e));
    const __m256d si = _mm256_i32gather_pd(s.data(), vi, 8);
    const __m256d sj = _mm256_i32gather_pd(s.data(), vj, 8);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(vals.data() + e), _mm256_mul_pd(si, sj), acc);
  }
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  lo = _mm_add_pd(lo, hi);
  double out = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; e < m; ++e) {
    out += vals[e] * s[static_cast<size_t>(ia[e])] * s[static_cast<size_t>(ja[e])];
  }
  return out;
}

}  // namespace finq::kernels::detail

#endif  // x86-64
