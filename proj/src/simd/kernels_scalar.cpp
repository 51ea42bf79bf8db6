#include "qieo/simd/kernels.hpp"

namespace qieo::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_squares_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

void syrk_upper_scalar(double* g, std::size_t ld, std::size_t n, const double* const* rows,
                       std::size_t count, double alpha) {
  for (std::size_t r = 0; r < count; ++r) {
    const double* x = rows[r];
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = alpha * x[i];
      double* gi = g + i * ld;
      for (std::size_t j = i; j < n; ++j) gi[j] += xi * x[j];
    }
  }
}

constexpr KernelTable kScalar{Level::scalar, dot_scalar, axpy_scalar, sum_squares_scalar,
                              syrk_upper_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace qieo::simd
