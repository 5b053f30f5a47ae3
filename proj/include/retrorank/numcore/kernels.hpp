#pragma once

// Inner-loop arithmetic used by every tensor op. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2+FMA variant. The active
// table is chosen once at startup from CPU features and can be pinned with
// RETRORANK_SIMD=scalar|avx2|auto.

#include <cstddef>
#include <span>

namespace retrorank::kernels {

enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x, W row-major rows x cols
  void (*gemv)(const double* w, const double* x, double* y, std::size_t rows, std::size_t cols);
  // y += a * b elementwise
  void (*mul_acc)(const double* a, const double* b, double* y, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

bool available(Isa isa);
const KernelTable& active();
Isa active_isa();
// Throws retrorank::Error if the requested ISA is unavailable.
void select(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace retrorank::kernels
