#pragma once

#include <cstdint>
#include <span>

// Arithmetic inner loops shared by the spin solvers and energy evaluators.
// Every kernel has a scalar reference implementation and, on x86-64 with
// AVX2+FMA, a vectorized variant selected once at runtime. The two variants
// are equivalence-tested against each other; results may differ by FMA
// rounding only.
namespace finq::kernels {

enum class Backend { scalar, avx2 };

// Backend picked at startup (best supported by the CPU).
Backend active_backend();

bool backend_supported(Backend b);

// Force a specific backend, primarily for equivalence tests.
// Throws finq::ValidationError if the CPU does not support it.
void set_backend(Backend b);

const char* backend_name(Backend b);

// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// sum_e vals[e] * s[ia[e]] * s[ja[e]]  — pair-coupling energy over a
// coordinate-list of interactions and a dense array of spin values.
double coupling_energy(std::span<const double> vals, std::span<const int32_t> ia,
                       std::span<const int32_t> ja, std::span<const double> s);

}  // namespace finq::kernels
