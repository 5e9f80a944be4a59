#include "wavegraph/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define WAVEGRAPH_HAVE_AVX2_PATH 1
#include <immintrin.h>
#else
#define WAVEGRAPH_HAVE_AVX2_PATH 0
#endif

namespace wavegraph::kernels::avx2 {

#if WAVEGRAPH_HAVE_AVX2_PATH

#define WG_AVX2 __attribute__((target("avx2,fma")))

namespace {

WG_AVX2 inline void row_axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d y0 = _mm256_loadu_pd(y + j);
    __m256d y1 = _mm256_loadu_pd(y + j + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j + 4), y1);
    _mm256_storeu_pd(y + j, y0);
    _mm256_storeu_pd(y + j + 4, y1);
  }
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

WG_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

WG_AVX2 double dot(std::size_t n, const double* x, const double* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

WG_AVX2 void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    }
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) row_axpy(n, arow[p], b + p * n, crow);
  }
}

WG_AVX2 void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a,
                     const double* g, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* grow = g + i * n;
    for (std::size_t p = 0; p < k; ++p) row_axpy(n, arow[p], grow, c + p * n);
  }
}

WG_AVX2 void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* g,
                     const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* grow = g + i * n;
    double* crow = c + i * k;
    for (std::size_t p = 0; p < k; ++p) crow[p] += dot(n, grow, b + p * n);
  }
}

WG_AVX2 void axpy(std::size_t n, double alpha, const double* x, double* y) {
  row_axpy(n, alpha, x, y);
}

WG_AVX2 void mul(std::size_t n, const double* x, const double* y, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

WG_AVX2 void mul_acc(std::size_t n, const double* x, const double* y, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                                              _mm256_loadu_pd(out + i)));
  }
  for (; i < n; ++i) out[i] += x[i] * y[i];
}

}  // namespace

const KernelTable* table() {
  static const KernelTable t{Isa::avx2, gemm, gemm_tn, gemm_nt, axpy, mul, mul_acc, dot};
  return &t;
}

#else

const KernelTable* table() { return nullptr; }

#endif

}  // namespace wavegraph::kernels::avx2
