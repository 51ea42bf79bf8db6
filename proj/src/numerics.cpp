#include "qieo/numerics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "qieo/error.hpp"
#include "qieo/simd/kernels.hpp"

namespace qieo {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ContractViolation("DenseMatrix: data length " + std::to_string(data_.size()) +
                            " != rows*cols = " + std::to_string(rows * cols));
  }
  if (!all_finite()) throw ContractViolation("DenseMatrix: non-finite entry");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool DenseMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Vector DenseMatrix::multiply(std::span<const double> v) const {
  if (v.size() != cols_) throw ContractViolation("DenseMatrix::multiply: length mismatch");
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = simd::dot(row(i), v);
  return out;
}

Vector DenseMatrix::transpose_multiply(std::span<const double> r) const {
  if (r.size() != rows_) throw ContractViolation("DenseMatrix::transpose_multiply: length mismatch");
  Vector out(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    if (r[i] != 0.0) simd::axpy(r[i], row(i), out);
  }
  return out;
}

double DenseMatrix::frobenius_norm() const { return std::sqrt(simd::sum_squares(data_)); }

double residual_sum_squares(const DenseMatrix& x, std::span<const double> y,
                            std::span<const double> w) {
  if (x.rows() != y.size() || x.cols() != w.size()) {
    throw ContractViolation("residual_sum_squares: dimension mismatch");
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double r = y[i] - simd::dot(x.row(i), w);
    sse += r * r;
  }
  return sse;
}

namespace {

// Column-major m x n working copy.
struct ColMajor {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> a;
  double* col(std::size_t j) { return a.data() + j * m; }
  const double* col(std::size_t j) const { return a.data() + j * m; }
};

Vector pinv_solve(const ColMajor& cm, std::span<const double> y, std::size_t& rank) {
  Eigen::Map<const Eigen::MatrixXd> a(cm.a.data(), static_cast<Eigen::Index>(cm.m),
                                      static_cast<Eigen::Index>(cm.n));
  Eigen::Map<const Eigen::VectorXd> rhs(y.data(), static_cast<Eigen::Index>(y.size()));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Vector out(cm.n, 0.0);
  rank = 0;
  if (sv.size() == 0 || sv(0) == 0.0) return out;
  const double cut = kRankTolerance * sv(0);
  Eigen::VectorXd uty = svd.matrixU().transpose() * rhs;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cm.n));
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= cut) continue;
    ++rank;
    c += svd.matrixV().col(i) * (uty(i) / sv(i));
  }
  for (std::size_t j = 0; j < cm.n; ++j) out[j] = c(static_cast<Eigen::Index>(j));
  return out;
}

// Householder QR with column pivoting; falls back to the SVD pseudo-inverse
// whenever the trailing pivot is small relative to the leading one.
Vector min_norm_solve(ColMajor cm, std::span<const double> y, std::size_t& rank) {
  const std::size_t m = cm.m;
  const std::size_t n = cm.n;
  const simd::KernelTable& k = simd::kernels();
  rank = 0;
  if (m == 0 || n == 0) return Vector(n, 0.0);
  if (m < n) return pinv_solve(cm, y, rank);

  const ColMajor original = cm;
  Vector qty(y.begin(), y.end());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Vector norms(n), reference(n);
  for (std::size_t j = 0; j < n; ++j) reference[j] = norms[j] = k.sum_squares(cm.col(j), m);

  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t j = c + 1; j < n; ++j) {
      if (norms[j] > norms[piv]) piv = j;
    }
    if (piv != c) {
      std::swap_ranges(cm.col(c), cm.col(c) + m, cm.col(piv));
      std::swap(perm[c], perm[piv]);
      std::swap(norms[c], norms[piv]);
      std::swap(reference[c], reference[piv]);
    }
    double* v = cm.col(c) + c;
    const std::size_t len = m - c;
    const double alpha = v[0];
    const double sigma = len > 1 ? k.sum_squares(v + 1, len - 1) : 0.0;
    double tau = 0.0;
    if (sigma != 0.0 || alpha < 0.0) {
      const double beta = -std::copysign(std::sqrt(alpha * alpha + sigma), alpha);
      const double v0 = alpha - beta;
      for (std::size_t i = 1; i < len; ++i) v[i] /= v0;
      tau = (beta - alpha) / beta;
      v[0] = beta;
    }
    if (tau != 0.0) {
      for (std::size_t j = c + 1; j < n; ++j) {
        double* t = cm.col(j) + c;
        const double s = tau * (t[0] + k.dot(v + 1, t + 1, len - 1));
        t[0] -= s;
        k.axpy(-s, v + 1, t + 1, len - 1);
      }
      double* t = qty.data() + c;
      const double s = tau * (t[0] + k.dot(v + 1, t + 1, len - 1));
      t[0] -= s;
      k.axpy(-s, v + 1, t + 1, len - 1);
    }
    for (std::size_t j = c + 1; j < n; ++j) {
      const double r = cm.col(j)[c];
      norms[j] -= r * r;
      if (norms[j] <= 1e-6 * reference[j]) {
        norms[j] = len > 1 ? k.sum_squares(cm.col(j) + c + 1, len - 1) : 0.0;
        reference[j] = norms[j];
      }
    }
  }

  const double lead = std::abs(cm.col(0)[0]);
  if (lead == 0.0) return Vector(n, 0.0);
  const double tail = std::abs(cm.col(n - 1)[n - 1]);
  if (tail <= 1e-8 * lead) return pinv_solve(original, y, rank);

  Vector z(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = qty[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= cm.col(j)[ii] * z[j];
    z[ii] = s / cm.col(ii)[ii];
  }
  Vector out(n);
  for (std::size_t j = 0; j < n; ++j) out[perm[j]] = z[j];
  rank = n;
  return out;
}

void check_finite_y(std::span<const double> y, const char* where) {
  for (double v : y) {
    if (!std::isfinite(v)) throw ContractViolation(std::string(where) + ": non-finite response");
  }
}

}  // namespace

LeastSquaresSolution least_squares(const DenseMatrix& a, std::span<const double> y) {
  if (a.rows() != y.size()) {
    throw ContractViolation("least_squares: A has " + std::to_string(a.rows()) +
                            " rows but y has length " + std::to_string(y.size()));
  }
  if (a.cols() == 0) throw ContractViolation("least_squares: A has no columns");
  check_finite_y(y, "least_squares");
  ColMajor cm{a.rows(), a.cols(), std::vector<double>(a.rows() * a.cols())};
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) cm.col(j)[i] = a(i, j);
  }
  LeastSquaresSolution out;
  out.coeffs = min_norm_solve(std::move(cm), y, out.rank);
  out.sse = residual_sum_squares(a, y, out.coeffs);
  return out;
}

RestrictedFit restricted_least_squares(const DenseMatrix& x, std::span<const double> y,
                                       std::span<const std::size_t> support) {
  if (x.rows() != y.size()) throw ContractViolation("restricted_least_squares: X rows != |y|");
  RestrictedFit fit;
  fit.support.assign(support.begin(), support.end());
  std::sort(fit.support.begin(), fit.support.end());
  fit.support.erase(std::unique(fit.support.begin(), fit.support.end()), fit.support.end());
  if (!fit.support.empty() && fit.support.back() >= x.cols()) {
    throw ContractViolation("restricted_least_squares: support index " +
                            std::to_string(fit.support.back()) + " out of range [0, " +
                            std::to_string(x.cols()) + ")");
  }
  fit.weights.assign(x.cols(), 0.0);
  if (fit.support.empty()) {
    fit.sse = simd::sum_squares(y);
    return fit;
  }
  const std::size_t m = x.rows();
  const std::size_t s = fit.support.size();
  ColMajor cm{m, s, std::vector<double>(m * s)};
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = x.row(i);
    for (std::size_t c = 0; c < s; ++c) cm.col(c)[i] = r[fit.support[c]];
  }
  std::size_t rank = 0;
  const Vector coeffs = min_norm_solve(std::move(cm), y, rank);
  for (std::size_t c = 0; c < s; ++c) fit.weights[fit.support[c]] = coeffs[c];
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = x.row(i);
    double pred = 0.0;
    for (std::size_t c = 0; c < s; ++c) pred += r[fit.support[c]] * coeffs[c];
    const double e = y[i] - pred;
    sse += e * e;
  }
  fit.sse = sse;
  return fit;
}

LeastSquaresSolution row_subset_least_squares(const DenseMatrix& x, std::span<const double> y,
                                              std::span<const std::size_t> rows) {
  if (x.rows() != y.size()) throw ContractViolation("row_subset_least_squares: X rows != |y|");
  const std::size_t p = x.cols();
  LeastSquaresSolution out;
  if (rows.empty()) {
    out.coeffs.assign(p, 0.0);
    return out;
  }
  ColMajor cm{rows.size(), p, std::vector<double>(rows.size() * p)};
  Vector ys(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= x.rows()) throw ContractViolation("row_subset_least_squares: row out of range");
    const auto xr = x.row(rows[r]);
    for (std::size_t j = 0; j < p; ++j) cm.col(j)[r] = xr[j];
    ys[r] = y[rows[r]];
  }
  out.coeffs = min_norm_solve(std::move(cm), ys, out.rank);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double e = y[rows[r]] - simd::dot(x.row(rows[r]), out.coeffs);
    out.sse += e * e;
  }
  return out;
}

double spectral_norm_sq(const DenseMatrix& x) {
  if (x.empty()) throw ContractViolation("spectral_norm_sq: empty matrix");
  const std::size_t p = x.cols();
  Vector v(p, 1.0 / std::sqrt(static_cast<double>(p)));
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    const Vector u = x.multiply(v);
    const double next = simd::sum_squares(u);
    Vector w = x.transpose_multiply(u);
    const double norm = std::sqrt(simd::sum_squares(w));
    if (norm == 0.0) return 0.0;
    for (double& e : w) e /= norm;
    v = std::move(w);
    const bool done = it > 0 && std::abs(next - lambda) <= 1e-9 * next;
    lambda = next;
    if (done) break;
  }
  // Rayleigh quotient of the final iterate is the tighter lower estimate.
  return std::max(lambda, simd::sum_squares(x.multiply(v)));
}

GramSystem::GramSystem(const DenseMatrix& x, std::span<const double> y)
    : x_(x), y_(y.begin(), y.end()), gram_(x.cols() * x.cols(), 0.0), xty_(x.cols(), 0.0) {
  if (x.rows() != y.size()) throw ContractViolation("GramSystem: X rows != |y|");
  const std::size_t n = x_.rows();
  const std::size_t p = x_.cols();
  std::vector<const double*> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = x_.row(i).data();
  simd::kernels().syrk_upper(gram_.data(), p, p, rows.data(), n, 1.0);
  xty_ = x_.transpose_multiply(y_);
}

namespace {

// Clean-row normal equations factored in place: the lower triangle of `g`
// (excluding the diagonal) holds L, `diag` its diagonal.
struct CholeskyFactor {
  std::vector<double> g;
  Vector diag;
  Vector h;
};

std::optional<CholeskyFactor> factor_clean_rows(const DenseMatrix& x, std::span<const double> y,
                                                const std::vector<double>& gram, const Vector& xty,
                                                std::span<const std::uint8_t> out_mask) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const simd::KernelTable& k = simd::kernels();
  const std::size_t n_out = static_cast<std::size_t>(std::count(out_mask.begin(), out_mask.end(), 1));
  const std::size_t n_in = n - n_out;
  if (n_in < p) return std::nullopt;

  CholeskyFactor f;
  std::vector<const double*> rows;
  // Downdate the full Gram matrix or build from scratch, whichever touches fewer rows.
  const bool downdate = n_out <= n_in;
  if (downdate) {
    f.g = gram;
    f.h = xty;
  } else {
    f.g.assign(p * p, 0.0);
    f.h.assign(p, 0.0);
  }
  rows.reserve(downdate ? n_out : n_in);
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<bool>(out_mask[i]) != downdate) continue;
    rows.push_back(x.row(i).data());
    k.axpy(downdate ? -y[i] : y[i], x.row(i).data(), f.h.data(), p);
  }
  k.syrk_upper(f.g.data(), p, p, rows.data(), rows.size(), downdate ? -1.0 : 1.0);

  double max_diag = 0.0;
  for (std::size_t j = 0; j < p; ++j) max_diag = std::max(max_diag, f.g[j * p + j]);
  if (max_diag <= 0.0) return std::nullopt;
  f.diag.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    double* lj = f.g.data() + j * p;
    const double d = lj[j] - k.dot(lj, lj, j);
    if (!(d > 1e-8 * max_diag)) return std::nullopt;
    f.diag[j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < p; ++i) {
      double* li = f.g.data() + i * p;
      li[j] = (lj[i] - k.dot(li, lj, j)) / f.diag[j];
    }
  }
  return f;
}

// Solves (L L^T) out = rhs in place.
void cholesky_solve(const CholeskyFactor& f, double* v, std::size_t p) {
  const simd::KernelTable& k = simd::kernels();
  for (std::size_t i = 0; i < p; ++i) v[i] = (v[i] - k.dot(f.g.data() + i * p, v, i)) / f.diag[i];
  for (std::size_t i = p; i-- > 0;) {
    double s = v[i];
    for (std::size_t r = i + 1; r < p; ++r) s -= f.g[r * p + i] * v[r];
    v[i] = s / f.diag[i];
  }
}

// Dense LU with partial pivoting for the small Woodbury capacitance system.
// Returns false when a pivot is tiny relative to the largest entry.
bool small_lu_solve(std::vector<double>& a, Vector& b, std::size_t d) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return d == 0;
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < d; ++r) {
      if (std::abs(a[r * d + c]) > std::abs(a[piv * d + c])) piv = r;
    }
    if (!(std::abs(a[piv * d + c]) > 1e-8 * scale)) return false;
    if (piv != c) {
      for (std::size_t j = 0; j < d; ++j) std::swap(a[c * d + j], a[piv * d + j]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < d; ++r) {
      const double f = a[r * d + c] / a[c * d + c];
      for (std::size_t j = c; j < d; ++j) a[r * d + j] -= f * a[c * d + j];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = d; c-- > 0;) {
    double s = b[c];
    for (std::size_t j = c + 1; j < d; ++j) s -= a[c * d + j] * b[j];
    b[c] = s / a[c * d + c];
  }
  return true;
}

}  // namespace

class GramSystem::Anchor {
 public:
  std::vector<std::uint8_t> out_mask;
  Vector coeffs;                     // clean-row fit at the reference set
  std::vector<double> inverse_rows;  // row i = G_ref^-1 x_i, n x p
  // Only for moderate n: K = X G_ref^-1 X^T (n x n) and the fitted values X coeffs.
  std::vector<double> kernel;
  Vector fitted;
};

std::vector<std::uint8_t> GramSystem::mask_of(std::span<const std::size_t> excluded) const {
  std::vector<std::uint8_t> out_mask(x_.rows(), 0);
  for (std::size_t i : excluded) {
    if (i >= x_.rows()) throw ContractViolation("GramSystem: excluded row out of range");
    out_mask[i] = 1;
  }
  return out_mask;
}

LeastSquaresSolution GramSystem::clean_row_sse(Vector coeffs, std::span<const std::uint8_t> out_mask) const {
  const simd::KernelTable& k = simd::kernels();
  const std::size_t p = x_.cols();
  LeastSquaresSolution out;
  out.coeffs = std::move(coeffs);
  out.rank = p;
  for (std::size_t i = 0; i < x_.rows(); ++i) {
    if (out_mask[i]) continue;
    const double e = y_[i] - k.dot(x_.row(i).data(), out.coeffs.data(), p);
    out.sse += e * e;
  }
  return out;
}

LeastSquaresSolution GramSystem::solve_excluding(std::span<const std::size_t> excluded) const {
  return solve_excluding(excluded, nullptr);
}

LeastSquaresSolution GramSystem::solve_excluding(std::span<const std::size_t> excluded,
                                                 const Anchor* anchor) const {
  const std::size_t n = x_.rows();
  const std::size_t p = x_.cols();
  const std::vector<std::uint8_t> out_mask = mask_of(excluded);

  if (anchor != nullptr) {
    if (auto fit = woodbury_solve(*anchor, out_mask)) return std::move(*fit);
  }

  auto f = factor_clean_rows(x_, y_, gram_, xty_, out_mask);
  if (!f) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
      if (!out_mask[i]) keep.push_back(i);
    }
    return row_subset_least_squares(x_, y_, keep);
  }
  Vector coeffs = std::move(f->h);
  cholesky_solve(*f, coeffs.data(), p);
  return clean_row_sse(std::move(coeffs), out_mask);
}

std::shared_ptr<const GramSystem::Anchor> GramSystem::make_anchor(
    std::span<const std::size_t> excluded) const {
  const std::size_t n = x_.rows();
  const std::size_t p = x_.cols();
  const simd::KernelTable& k = simd::kernels();
  auto a = std::make_shared<Anchor>();
  a->out_mask = mask_of(excluded);
  auto f = factor_clean_rows(x_, y_, gram_, xty_, a->out_mask);
  if (!f) return nullptr;
  a->coeffs = f->h;
  cholesky_solve(*f, a->coeffs.data(), p);
  a->inverse_rows.resize(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    double* z = a->inverse_rows.data() + i * p;
    std::copy_n(x_.row(i).data(), p, z);
    cholesky_solve(*f, z, p);
  }
  if (n <= kAnchorKernelRows) {
    a->kernel.resize(n * n);
    a->fitted.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      a->fitted[i] = k.dot(x_.row(i).data(), a->coeffs.data(), p);
      for (std::size_t j = 0; j <= i; ++j) {
        const double v = k.dot(x_.row(i).data(), a->inverse_rows.data() + j * p, p);
        a->kernel[i * n + j] = v;
        a->kernel[j * n + i] = v;
      }
    }
  }
  return a;
}

// Rows whose membership differs from the anchor enter as a rank-d update
// G = G_ref + sum_i s_i x_i x_i^T (s_i = +1 when a row rejoins the clean set,
// -1 when it leaves). With z_i = G_ref^-1 x_i and a = G_ref^-1 h,
//   w = a - Z (D + U^T Z)^-1 U^T a,
// so w = w_ref + sum_j c_j z_j for d coefficients c. When the anchor carries
// K = X G_ref^-1 X^T, both the capacitance matrix and the fitted values
// x_i^T w = fitted_i + sum_j c_j K_ij come from lookups.
constexpr double kVectorSpeedup = 8.0;

std::optional<LeastSquaresSolution> GramSystem::woodbury_solve(
    const Anchor& anchor, std::span<const std::uint8_t> out_mask) const {
  const std::size_t n = x_.rows();
  const std::size_t p = x_.cols();
  const simd::KernelTable& k = simd::kernels();
  const bool tabulated = !anchor.kernel.empty();
  const std::size_t n_out = static_cast<std::size_t>(std::count(out_mask.begin(), out_mask.end(), 1));
  const std::size_t n_in = n - n_out;

  // Rough flop counts decide how far from the anchor the update still pays.
  // The direct route runs almost entirely in the vector kernels, the update's
  // small LU and gathers do not, hence the factor on the direct side.
  const double pd = static_cast<double>(p);
  const double direct = (static_cast<double>(std::min(n_out, n_in)) * pd * pd / 2 + pd * pd * pd / 6 +
                         static_cast<double>(n_in) * pd) / kVectorSpeedup;
  std::size_t reach = 0;
  while (reach < n) {
    const double d = static_cast<double>(reach + 1);
    const double update = tabulated ? d * d * d / 3 + static_cast<double>(n_in) * std::min(d, pd) + d * pd
                                    : d * d * d / 3 + d * d * pd + static_cast<double>(n_in) * pd;
    if (update > direct) break;
    ++reach;
  }
  std::vector<std::size_t> changed;
  for (std::size_t i = 0; i < n; ++i) {
    if (out_mask[i] != anchor.out_mask[i]) {
      if (changed.size() == reach) return std::nullopt;
      changed.push_back(i);
    }
  }
  const std::size_t d = changed.size();
  auto z = [&](std::size_t i) { return anchor.inverse_rows.data() + i * p; };
  auto sign = [&](std::size_t i) { return out_mask[i] ? -1.0 : 1.0; };
  auto kern = [&](std::size_t i, std::size_t j) {
    return tabulated ? anchor.kernel[i * n + j] : k.dot(x_.row(i).data(), z(j), p);
  };

  // c_j starts at s_j y_j (the change in h); t = U^T a.
  Vector c(d), t(d);
  for (std::size_t r = 0; r < d; ++r) c[r] = sign(changed[r]) * y_[changed[r]];
  std::vector<double> cap(d * d);
  for (std::size_t r = 0; r < d; ++r) {
    const std::size_t i = changed[r];
    double tr = tabulated ? anchor.fitted[i] : k.dot(x_.row(i).data(), anchor.coeffs.data(), p);
    for (std::size_t col = 0; col < d; ++col) {
      const double v = kern(i, changed[col]);
      cap[r * d + col] = v;
      tr += c[col] * v;
    }
    cap[r * d + r] += sign(i);
    t[r] = tr;
  }
  if (!small_lu_solve(cap, t, d)) return std::nullopt;
  for (std::size_t r = 0; r < d; ++r) c[r] -= t[r];

  LeastSquaresSolution out;
  out.coeffs = anchor.coeffs;
  for (std::size_t r = 0; r < d; ++r) k.axpy(c[r], z(changed[r]), out.coeffs.data(), p);
  out.rank = p;
  if (tabulated && d < p) {
    for (std::size_t i = 0; i < n; ++i) {
      if (out_mask[i]) continue;
      const double* ki = anchor.kernel.data() + i * n;
      double pred = anchor.fitted[i];
      for (std::size_t r = 0; r < d; ++r) pred += c[r] * ki[changed[r]];
      const double e = y_[i] - pred;
      out.sse += e * e;
    }
    return out;
  }
  return clean_row_sse(std::move(out.coeffs), out_mask);
}

}  // namespace qieo
