#pragma once

// Dense linear algebra used by every support-based fitness evaluation.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace qieo {

using Vector = std::vector<double>;

/// Row-major dense matrix with finite entries.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  /// Throws ContractViolation on a size mismatch or a non-finite entry.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool all_finite() const noexcept;
  /// X v
  Vector multiply(std::span<const double> v) const;
  /// X^T r
  Vector transpose_multiply(std::span<const double> r) const;
  double frobenius_norm() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LeastSquaresSolution {
  Vector coeffs;
  double sse = 0.0;
  std::size_t rank = 0;
};

/// Singular values at or below this fraction of the largest are treated as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Minimum-norm least-squares solution of A c ~ y.
///
/// Householder QR with column pivoting handles the full-rank case; a
/// rank-deficient or badly conditioned A is re-solved through the SVD
/// pseudo-inverse with the kRankTolerance cut. sse is ||y - A c||^2 computed
/// from the residual directly.
LeastSquaresSolution least_squares(const DenseMatrix& a, std::span<const double> y);

struct RestrictedFit {
  Vector weights;                    // length p, zero off-support
  std::vector<std::size_t> support;  // sorted, unique
  double sse = 0.0;
};

/// Least squares on the column submatrix X_S; duplicate indices collapse.
RestrictedFit restricted_least_squares(const DenseMatrix& x, std::span<const double> y,
                                       std::span<const std::size_t> support);

/// Least squares using only the listed rows of X (sorted or not, no duplicates).
/// sse sums over those rows only.
LeastSquaresSolution row_subset_least_squares(const DenseMatrix& x, std::span<const double> y,
                                              std::span<const std::size_t> rows);

/// ||y - X w||^2
double residual_sum_squares(const DenseMatrix& x, std::span<const double> y,
                            std::span<const double> w);

/// sigma_max(X)^2 by power iteration on X^T X from the normalized all-ones vector.
double spectral_norm_sq(const DenseMatrix& x);

/// Normal equations of (X, y) kept around so that "all rows except S" fits cost
/// O(min(|S|, n-|S|) p^2 + p^3) instead of a fresh QR.
///
/// Falls back to row_subset_least_squares whenever the Cholesky pivots show the
/// clean-row system is rank deficient or poorly conditioned.
class GramSystem {
 public:
  /// Cholesky factor of the clean-row system at one reference excluded set,
  /// plus (X_clean^T X_clean)^-1 x_i for every row i. Candidates that differ
  /// from the reference in d rows are then solved by a rank-d Woodbury update.
  class Anchor;

  GramSystem(const DenseMatrix& x, std::span<const double> y);

  /// Fit over every row not listed in `excluded` (unique indices < n).
  LeastSquaresSolution solve_excluding(std::span<const std::size_t> excluded) const;

  /// Same fit, through `anchor` when the excluded set is close enough to the
  /// anchor's for a low-rank update to be cheaper. Agrees with the direct route
  /// up to rounding.
  LeastSquaresSolution solve_excluding(std::span<const std::size_t> excluded,
                                       const Anchor* anchor) const;

  /// nullptr when the reference system is too poorly conditioned to anchor on.
  std::shared_ptr<const Anchor> make_anchor(std::span<const std::size_t> excluded) const;

  /// Anchors tabulate the n x n matrix X G^-1 X^T only up to this many rows.
  static constexpr std::size_t kAnchorKernelRows = 2048;

  const DenseMatrix& matrix() const noexcept { return x_; }
  std::span<const double> response() const noexcept { return y_; }

 private:
  DenseMatrix x_;
  Vector y_;
  std::vector<std::uint8_t> mask_of(std::span<const std::size_t> excluded) const;
  LeastSquaresSolution clean_row_sse(Vector coeffs, std::span<const std::uint8_t> out_mask) const;
  std::optional<LeastSquaresSolution> woodbury_solve(const Anchor& anchor,
                                                     std::span<const std::uint8_t> out_mask) const;

  std::vector<double> gram_;  // upper triangle of X^T X, row-major p x p
  Vector xty_;
};

}  // namespace qieo
