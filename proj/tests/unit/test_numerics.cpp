#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qieo/error.hpp"
#include "qieo/numerics.hpp"
#include "qieo/rng.hpp"

using namespace qieo;

namespace {

DenseMatrix random_matrix(std::size_t n, std::size_t p, Rng& rng) {
  DenseMatrix x(n, p);
  for (double& e : x.data()) e = rng.normal();
  return x;
}

Vector random_vector(std::size_t n, Rng& rng) {
  Vector v(n);
  for (double& e : v) e = rng.normal();
  return v;
}

Eigen::MatrixXd to_eigen(const DenseMatrix& x) {
  Eigen::MatrixXd m(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) m(i, j) = x(i, j);
  return m;
}

// Minimum-norm solution through an SVD pseudo-inverse with the same relative cut.
Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  const double cut = s.size() > 0 ? s(0) * kRankTolerance : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * y;
}

double max_abs_diff(std::span<const double> a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b(static_cast<Eigen::Index>(i))));
  return worst;
}

double orthogonality_bound(const DenseMatrix& x, std::span<const double> y) {
  double yinf = 0.0;
  for (double v : y) yinf = std::max(yinf, std::abs(v));
  return 1e-8 * std::max(1.0, x.frobenius_norm() * yinf);
}

}  // namespace

TEST_CASE("least_squares: identity and single column") {
  const Vector y = {1, 2, 3};
  auto id = least_squares(DenseMatrix::identity(3), y);
  CHECK(id.coeffs == Vector{1, 2, 3});
  CHECK(id.sse == doctest::Approx(0.0));
  CHECK(id.rank == 3);

  auto col = least_squares(DenseMatrix(3, 1, {1, 1, 1}), y);
  REQUIRE(col.coeffs.size() == 1);
  CHECK(col.coeffs[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(col.sse == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("least_squares: all-zero design and dimension mismatch") {
  const Vector y = {1, -2, 2};
  auto zero = least_squares(DenseMatrix(3, 2), y);
  CHECK(zero.coeffs == Vector{0, 0});
  CHECK(zero.sse == 9.0);
  CHECK(zero.rank == 0);
  CHECK_THROWS_AS(least_squares(DenseMatrix(2, 2), y), ContractViolation);
}

TEST_CASE("least_squares: duplicated columns give the minimum-norm minimizer") {
  // [1 1; 2 2; 3 3] c = (1, 2, 4): every c with c0 + c1 = t* minimizes, the
  // smallest one splits t* evenly.
  const DenseMatrix a(3, 2, {1, 1, 2, 2, 3, 3});
  const Vector y = {1, 2, 4};
  const auto ls = least_squares(a, y);
  const Eigen::VectorXd oracle = pinv_solve(to_eigen(a), Eigen::Vector3d(1, 2, 4));
  CHECK(max_abs_diff(ls.coeffs, oracle) <= 1e-12);
  CHECK(ls.rank == 1);
  const double t_star = (1 + 4 + 12) / 14.0;
  CHECK(ls.coeffs[0] == doctest::Approx(t_star / 2).epsilon(1e-12));
  CHECK(ls.coeffs[1] == doctest::Approx(t_star / 2).epsilon(1e-12));
  // Another exact minimizer, (t*, 0), has a larger norm.
  CHECK(std::hypot(ls.coeffs[0], ls.coeffs[1]) <= t_star + 1e-15);
}

TEST_CASE("least_squares agrees with an SVD pseudo-inverse oracle on random shapes") {
  Rng rng(10);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(14), p = 1 + rng.below(9);
    DenseMatrix a = random_matrix(n, p, rng);
    if (trial % 3 == 0 && p >= 2) {
      // Force rank deficiency: column 1 copies column 0.
      for (std::size_t i = 0; i < n; ++i) a(i, 1) = 2.0 * a(i, 0);
    }
    const Vector y = random_vector(n, rng);
    const auto ls = least_squares(a, y);
    const Eigen::MatrixXd ea = to_eigen(a);
    const Eigen::VectorXd ey = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd oracle = pinv_solve(ea, ey);
    CAPTURE(n);
    CAPTURE(p);
    CHECK(max_abs_diff(ls.coeffs, oracle) <= 1e-9 * std::max(1.0, oracle.norm()));
    const double sse = (ey - ea * oracle).squaredNorm();
    CHECK(std::abs(ls.sse - sse) <= 1e-9 * std::max(1.0, ey.squaredNorm()));
  }
}

TEST_CASE("restricted_least_squares: orthonormal and empty supports") {
  const Vector y = {5, 6, 7, 8};
  const std::vector<std::size_t> s = {0, 2};
  const auto fit = restricted_least_squares(DenseMatrix::identity(4), y, s);
  CHECK(fit.weights == Vector{5, 0, 7, 0});
  CHECK(fit.sse == doctest::Approx(100.0));
  CHECK(fit.support == s);

  const auto none = restricted_least_squares(DenseMatrix::identity(4), y, {});
  CHECK(none.weights == Vector{0, 0, 0, 0});
  CHECK(none.sse == 25 + 36 + 49 + 64);

  const std::vector<std::size_t> bad = {4};
  CHECK_THROWS_AS(restricted_least_squares(DenseMatrix::identity(4), y, bad), ContractViolation);
}

TEST_CASE("restricted_least_squares: residual orthogonal to the selected columns") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 6, p = 4;
    const DenseMatrix x = random_matrix(n, p, rng);
    const Vector y = random_vector(n, rng);
    const std::vector<std::size_t> s = {1, 3};
    const auto fit = restricted_least_squares(x, y, s);
    const Vector pred = x.multiply(fit.weights);
    Vector r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - pred[i];
    const Vector g = x.transpose_multiply(r);
    for (std::size_t j : s) CHECK(std::abs(g[j]) <= orthogonality_bound(x, y));
    CHECK(fit.weights[0] == 0.0);
    CHECK(fit.weights[2] == 0.0);
  }
}

TEST_CASE("restricted_least_squares: order and duplicates in the support do not matter") {
  Rng rng(12);
  const DenseMatrix x = random_matrix(9, 6, rng);
  const Vector y = random_vector(9, rng);
  const std::vector<std::size_t> a = {4, 1, 2}, b = {1, 2, 4, 2};
  const auto fa = restricted_least_squares(x, y, a);
  const auto fb = restricted_least_squares(x, y, b);
  CHECK(fa.support == std::vector<std::size_t>{1, 2, 4});
  CHECK(fa.support == fb.support);
  for (std::size_t j = 0; j < 6; ++j) CHECK(fa.weights[j] == doctest::Approx(fb.weights[j]).epsilon(1e-12));
}

TEST_CASE("property: adding a column never increases sse") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.below(8), p = 6;
    const DenseMatrix x = random_matrix(n, p, rng);
    const Vector y = random_vector(n, rng);
    std::vector<std::size_t> s;
    double prev = residual_sum_squares(x, y, Vector(p, 0.0));
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (std::size_t j : order) {
      s.push_back(j);
      const double sse = restricted_least_squares(x, y, s).sse;
      CHECK(sse <= prev + 1e-10 * (1.0 + prev));
      prev = sse;
    }
  }
}

TEST_CASE("row_subset_least_squares matches a fit on the copied rows") {
  Rng rng(14);
  const DenseMatrix x = random_matrix(20, 4, rng);
  const Vector y = random_vector(20, rng);
  const std::vector<std::size_t> rows = {17, 2, 9, 3, 11, 0, 5};
  DenseMatrix sub(rows.size(), 4);
  Vector ysub(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < 4; ++j) sub(r, j) = x(rows[r], j);
    ysub[r] = y[rows[r]];
  }
  const auto a = row_subset_least_squares(x, y, rows);
  const auto b = least_squares(sub, ysub);
  for (std::size_t j = 0; j < 4; ++j) CHECK(a.coeffs[j] == doctest::Approx(b.coeffs[j]).epsilon(1e-12));
  CHECK(a.sse == doctest::Approx(b.sse).epsilon(1e-12));
}

TEST_CASE("spectral_norm_sq: closed forms") {
  DenseMatrix two = DenseMatrix::identity(3);
  for (double& e : two.data()) e *= 2.0;
  CHECK(spectral_norm_sq(two) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(spectral_norm_sq(DenseMatrix(2, 2, {1, 0, 0, 3})) == doctest::Approx(9.0).epsilon(1e-9));
  CHECK(spectral_norm_sq(DenseMatrix(2, 2, {1, 1, 0, 1})) == doctest::Approx((3 + std::sqrt(5.0)) / 2).epsilon(1e-9));
  CHECK(spectral_norm_sq(DenseMatrix(3, 2)) == 0.0);
}

TEST_CASE("spectral_norm_sq: matches the SVD and bounds every Rayleigh quotient") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix x = random_matrix(8 + rng.below(10), 2 + rng.below(8), rng);
    const double sn = spectral_norm_sq(x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(x));
    const double smax = svd.singularValues()(0);
    CHECK(sn == doctest::Approx(smax * smax).epsilon(1e-7));
    for (int probe = 0; probe < 10; ++probe) {
      const Vector v = random_vector(x.cols(), rng);
      const Vector xv = x.multiply(v);
      double num = 0, den = 0;
      for (double e : xv) num += e * e;
      for (double e : v) den += e * e;
      CHECK(num / den <= sn * (1 + 1e-7));
    }
  }
}

TEST_CASE("DenseMatrix rejects bad data") {
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1, 2, 3}), ContractViolation);
  CHECK_THROWS_AS(DenseMatrix(1, 2, {1, std::nan("")}), ContractViolation);
  CHECK_THROWS_AS(DenseMatrix(1, 1, {INFINITY}), ContractViolation);
}

TEST_CASE("GramSystem::solve_excluding agrees with the row-subset fit") {
  Rng rng(16);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 30 + rng.below(30), p = 1 + rng.below(8);
    const DenseMatrix x = random_matrix(n, p, rng);
    const Vector y = random_vector(n, rng);
    const GramSystem gram(x, y);
    // Both the downdate path (few excluded) and the rebuild path (many excluded).
    const std::size_t count = trial % 2 == 0 ? rng.below(5) : n - p - 1 - rng.below(3);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng.engine());
    const std::vector<std::size_t> excluded(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
    const std::vector<std::size_t> kept(all.begin() + static_cast<std::ptrdiff_t>(count), all.end());
    const auto a = gram.solve_excluding(excluded);
    const auto b = row_subset_least_squares(x, y, kept);
    CAPTURE(count);
    for (std::size_t j = 0; j < p; ++j) CHECK(a.coeffs[j] == doctest::Approx(b.coeffs[j]).epsilon(1e-8));
    CHECK(std::abs(a.sse - b.sse) <= 1e-9 * (1 + b.sse));
  }
}

TEST_CASE("GramSystem falls back correctly on a rank-deficient clean set") {
  // Column 1 duplicates column 0 on every row, so X^T X is singular.
  Rng rng(17);
  DenseMatrix x = random_matrix(12, 3, rng);
  for (std::size_t i = 0; i < 12; ++i) x(i, 1) = x(i, 0);
  const Vector y = random_vector(12, rng);
  const GramSystem gram(x, y);
  const std::vector<std::size_t> excluded = {3, 7};
  const std::vector<std::size_t> kept = {0, 1, 2, 4, 5, 6, 8, 9, 10, 11};
  const auto a = gram.solve_excluding(excluded);
  const auto b = row_subset_least_squares(x, y, kept);
  for (std::size_t j = 0; j < 3; ++j) CHECK(a.coeffs[j] == doctest::Approx(b.coeffs[j]).epsilon(1e-8));
  CHECK(a.sse == doctest::Approx(b.sse).epsilon(1e-8));
  CHECK(gram.make_anchor(excluded) == nullptr);
}

TEST_CASE("property: anchored fits equal direct fits for nearby excluded sets") {
  Rng rng(18);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 60 + rng.below(60), p = 3 + rng.below(10), k = 6 + rng.below(10);
    const DenseMatrix x = random_matrix(n, p, rng);
    const Vector y = random_vector(n, rng);
    const GramSystem gram(x, y);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng.engine());
    const std::vector<std::size_t> reference(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    const auto anchor = gram.make_anchor(reference);
    REQUIRE(anchor != nullptr);
    for (int probe = 0; probe < 10; ++probe) {
      // Swap d reference rows for rows outside it.
      std::vector<std::size_t> excluded = reference;
      const std::size_t d = rng.below(std::min<std::size_t>(k, 5) + 1);
      for (std::size_t t = 0; t < d; ++t) excluded[t] = all[k + t];
      const auto near = gram.solve_excluding(excluded, anchor.get());
      const auto direct = gram.solve_excluding(excluded);
      CAPTURE(d);
      for (std::size_t j = 0; j < p; ++j) {
        CHECK(near.coeffs[j] == doctest::Approx(direct.coeffs[j]).epsilon(1e-8).scale(1.0));
      }
      CHECK(std::abs(near.sse - direct.sse) <= 1e-8 * (1 + direct.sse));
    }
  }
}
