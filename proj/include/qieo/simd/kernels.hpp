#pragma once

// Double-precision inner-loop kernels behind every fitness evaluation.
//
// Each kernel has a scalar reference implementation and, on x86-64 builds, an
// AVX2/FMA variant. The variant is picked once at startup from CPUID and can be
// forced with QIEO_SIMD=scalar|avx2|auto (or set_level()). Variants agree with
// the reference up to floating-point reassociation; tests/unit/test_simd.cpp
// pins the tolerance.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace qieo::simd {

enum class Level { scalar, avx2 };

struct KernelTable {
  Level level;
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  /// Upper triangle (j >= i) of the row-major n x n matrix g, leading dimension ld,
  /// gets alpha * sum_r rows[r] rows[r]^T. Strictly-lower entries are untouched.
  void (*syrk_upper)(double* g, std::size_t ld, std::size_t n, const double* const* rows,
                     std::size_t count, double alpha);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table() noexcept;

bool supported(Level level) noexcept;
Level active_level() noexcept;
/// Throws std::invalid_argument when `level` is unsupported on this host.
void set_level(Level level);
std::string_view level_name(Level level) noexcept;
std::optional<Level> parse_level(std::string_view name) noexcept;

const KernelTable& kernels() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}
inline double sum_squares(std::span<const double> a) {
  return kernels().sum_squares(a.data(), a.size());
}

}  // namespace qieo::simd
