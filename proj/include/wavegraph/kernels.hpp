#pragma once

// Dense double-precision inner loops behind the tensor ops.
//
// Every kernel has a portable scalar reference and an AVX2+FMA variant; the
// variant is picked once at startup from CPUID and can be pinned with the
// WAVEGRAPH_KERNELS environment variable ("scalar" or "avx2"). Matrices are
// row-major and tightly packed.

#include <cstddef>
#include <string_view>

namespace wavegraph::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  /// c[m x n] (+)= a[m x k] * b[k x n]
  void (*gemm)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
               double* c, bool accumulate);
  /// c[k x n] += a[m x k]^T * g[m x n]
  void (*gemm_tn)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* g,
                  double* c);
  /// c[m x k] += g[m x n] * b[k x n]^T
  void (*gemm_nt)(std::size_t m, std::size_t k, std::size_t n, const double* g, const double* b,
                  double* c);
  /// y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  /// out = x * y
  void (*mul)(std::size_t n, const double* x, const double* y, double* out);
  /// out += x * y
  void (*mul_acc)(std::size_t n, const double* x, const double* y, double* out);
  double (*dot)(std::size_t n, const double* x, const double* y);
};

namespace scalar {
const KernelTable& table();
}

namespace avx2 {
/// Null when the build has no AVX2 code path (non-x86 targets).
const KernelTable* table();
}

bool cpu_has_avx2();

/// Kernel table in use by the tensor ops.
const KernelTable& active();

/// Pin the active table (tests, benchmarking). Throws InvalidInput if the ISA
/// is unavailable on this CPU.
void select(Isa isa);

std::string_view name(Isa isa);

}  // namespace wavegraph::kernels
