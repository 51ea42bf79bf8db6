// Compiled with -mavx2 -mfma; only reached after a CPUID check in dispatch.cpp.
#include <immintrin.h>

#include "qieo/simd/kernels.hpp"

namespace qieo::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd();
  __m256d s3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
    s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), s2);
    s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), s3);
  }
  for (; i + 4 <= n; i += 4) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  }
  double s = hsum(_mm256_add_pd(_mm256_add_pd(s0, s1), _mm256_add_pd(s2, s3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    __m256d y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4));
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double sum_squares_avx2(const double* a, std::size_t n) { return dot_avx2(a, a, n); }

// Four source rows per pass so each stripe of g is loaded and stored once per block.
void syrk_upper_avx2(double* g, std::size_t ld, std::size_t n, const double* const* rows,
                     std::size_t count, double alpha) {
  std::size_t r = 0;
  for (; r + 4 <= count; r += 4) {
    const double* x0 = rows[r];
    const double* x1 = rows[r + 1];
    const double* x2 = rows[r + 2];
    const double* x3 = rows[r + 3];
    for (std::size_t i = 0; i < n; ++i) {
      const double a0 = alpha * x0[i];
      const double a1 = alpha * x1[i];
      const double a2 = alpha * x2[i];
      const double a3 = alpha * x3[i];
      const __m256d v0 = _mm256_set1_pd(a0);
      const __m256d v1 = _mm256_set1_pd(a1);
      const __m256d v2 = _mm256_set1_pd(a2);
      const __m256d v3 = _mm256_set1_pd(a3);
      double* gi = g + i * ld;
      std::size_t j = i;
      for (; j + 4 <= n; j += 4) {
        __m256d acc = _mm256_loadu_pd(gi + j);
        acc = _mm256_fmadd_pd(v0, _mm256_loadu_pd(x0 + j), acc);
        acc = _mm256_fmadd_pd(v1, _mm256_loadu_pd(x1 + j), acc);
        acc = _mm256_fmadd_pd(v2, _mm256_loadu_pd(x2 + j), acc);
        acc = _mm256_fmadd_pd(v3, _mm256_loadu_pd(x3 + j), acc);
        _mm256_storeu_pd(gi + j, acc);
      }
      for (; j < n; ++j) gi[j] += a0 * x0[j] + a1 * x1[j] + a2 * x2[j] + a3 * x3[j];
    }
  }
  for (; r < count; ++r) {
    const double* x = rows[r];
    for (std::size_t i = 0; i < n; ++i) axpy_avx2(alpha * x[i], x + i, g + i * ld + i, n - i);
  }
}

constexpr KernelTable kAvx2{Level::avx2, dot_avx2, axpy_avx2, sum_squares_avx2, syrk_upper_avx2};

}  // namespace

const KernelTable& avx2_table_unchecked() noexcept { return kAvx2; }

}  // namespace qieo::simd
