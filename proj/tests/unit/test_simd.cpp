#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qieo/rng.hpp"
#include "qieo/simd/kernels.hpp"

using namespace qieo;

namespace {

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& e : v) e = rng.normal();
  return v;
}

// Reassociation bound for a length-n sum of products: a few ulps per term,
// scaled by the magnitude of the terms rather than of the (possibly
// cancelling) result.
double sum_tolerance(std::size_t n, double abs_sum) {
  return 4.0 * static_cast<double>(n + 1) * 1.1102230246251565e-16 * abs_sum + 1e-300;
}

}  // namespace

TEST_CASE("scalar reference kernels match long-double loops") {
  Rng rng(1);
  const simd::KernelTable& s = simd::scalar_table();
  for (std::size_t n : {0u, 1u, 2u, 3u, 7u, 64u, 129u}) {
    const auto a = random_vector(n, rng);
    const auto b = random_vector(n, rng);
    long double dot = 0, ss = 0, mag = 0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += static_cast<long double>(a[i]) * b[i];
      ss += static_cast<long double>(a[i]) * a[i];
      mag += std::abs(a[i] * b[i]);
    }
    CHECK(std::abs(s.dot(a.data(), b.data(), n) - static_cast<double>(dot)) <=
          sum_tolerance(n, static_cast<double>(mag)));
    CHECK(std::abs(s.sum_squares(a.data(), n) - static_cast<double>(ss)) <=
          sum_tolerance(n, static_cast<double>(ss)));
  }
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const simd::KernelTable* v = simd::avx2_table();
  if (v == nullptr) {
    MESSAGE("AVX2 variant unavailable on this host; equivalence not exercised");
    return;
  }
  const simd::KernelTable& s = simd::scalar_table();
  Rng rng(2);
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto a = random_vector(n, rng);
    const auto b = random_vector(n, rng);
    double mag = 0, ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mag += std::abs(a[i] * b[i]);
      ss += a[i] * a[i];
    }
    CHECK(std::abs(v->dot(a.data(), b.data(), n) - s.dot(a.data(), b.data(), n)) <= 2 * sum_tolerance(n, mag));
    CHECK(std::abs(v->sum_squares(a.data(), n) - s.sum_squares(a.data(), n)) <= 2 * sum_tolerance(n, ss));

    // axpy is elementwise; FMA contraction may differ from mul+add by one rounding.
    auto y1 = b, y2 = b;
    s.axpy(0.37, a.data(), y1.data(), n);
    v->axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(y1[i] - y2[i]) <= 4e-16 * (std::abs(0.37 * a[i]) + std::abs(b[i])));
    }
  }
}

TEST_CASE("AVX2 syrk_upper agrees with the scalar reference and leaves the lower triangle alone") {
  const simd::KernelTable* v = simd::avx2_table();
  if (v == nullptr) return;
  const simd::KernelTable& s = simd::scalar_table();
  Rng rng(3);
  for (std::size_t n : {1u, 3u, 4u, 5u, 9u, 17u}) {
    for (std::size_t count : {0u, 1u, 5u, 6u, 13u}) {
      std::vector<std::vector<double>> rows_data(count);
      std::vector<const double*> rows(count);
      for (std::size_t r = 0; r < count; ++r) {
        rows_data[r] = random_vector(n + 2, rng);  // ld > n on the rows too
        rows[r] = rows_data[r].data();
      }
      const std::size_t ld = n + 1;
      std::vector<double> g1(n * ld, 0.0);
      for (double& e : g1) e = rng.normal();
      auto g2 = g1;
      const double alpha = -0.75;
      s.syrk_upper(g1.data(), ld, n, rows.data(), count, alpha);
      v->syrk_upper(g2.data(), ld, n, rows.data(), count, alpha);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j < i) {
            CHECK(g1[i * ld + j] == g2[i * ld + j]);
            continue;
          }
          double mag = std::abs(g1[i * ld + j]);
          for (std::size_t r = 0; r < count; ++r) mag += std::abs(rows[r][i] * rows[r][j]);
          CHECK(std::abs(g1[i * ld + j] - g2[i * ld + j]) <= 2 * sum_tolerance(count, mag));
        }
      }
    }
  }
}

TEST_CASE("syrk_upper matches an explicit outer-product sum") {
  const simd::KernelTable& s = simd::scalar_table();
  const double r0[] = {1, 2, 3};
  const double r1[] = {-1, 0, 4};
  const double* rows[] = {r0, r1};
  std::vector<double> g(9, 0.0);
  g[3] = 42.0;  // strictly lower, must survive
  s.syrk_upper(g.data(), 3, 3, rows, 2, 2.0);
  CHECK(g[0] == 4.0);   // 2 * (1 + 1)
  CHECK(g[1] == 4.0);   // 2 * (2 + 0)
  CHECK(g[2] == -2.0);  // 2 * (3 - 4)
  CHECK(g[4] == 8.0);
  CHECK(g[5] == 12.0);
  CHECK(g[8] == 50.0);  // 2 * (9 + 16)
  CHECK(g[3] == 42.0);
}

TEST_CASE("dispatch: level names, parsing and forced levels") {
  CHECK(simd::parse_level("scalar") == simd::Level::scalar);
  CHECK(simd::parse_level("avx2") == simd::Level::avx2);
  CHECK_FALSE(simd::parse_level("neon").has_value());
  CHECK(simd::level_name(simd::Level::scalar) == "scalar");
  CHECK(simd::supported(simd::Level::scalar));

  const simd::Level before = simd::active_level();
  simd::set_level(simd::Level::scalar);
  CHECK(simd::kernels().level == simd::Level::scalar);
  if (simd::supported(simd::Level::avx2)) {
    simd::set_level(simd::Level::avx2);
    CHECK(simd::kernels().level == simd::Level::avx2);
  } else {
    CHECK_THROWS_AS(simd::set_level(simd::Level::avx2), std::invalid_argument);
  }
  simd::set_level(before);
}
