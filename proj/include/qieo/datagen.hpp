#pragma once

// Synthetic sparse-recovery and robust-regression datasets.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qieo/numerics.hpp"

namespace qieo {

struct SparseGenConfig {
  std::size_t n = 16;
  std::size_t p = 50;
  std::size_t s = 5;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  /// Throws ContractViolation unless 1 <= s <= p, n >= 1, sigma >= 0.
  void validate() const;
  /// Non-fatal findings, e.g. the n >= s ln p sample-complexity condition failing.
  std::vector<std::string> warnings() const;
  friend bool operator==(const SparseGenConfig&, const SparseGenConfig&) = default;
};

struct RobustGenConfig {
  std::size_t n = 600;
  std::size_t p = 100;
  double alpha = 0.1;
  double outlier_scale = 5.0;
  std::uint64_t seed = 0;

  /// floor(alpha * n)
  std::size_t k() const;
  /// Throws ContractViolation unless 0 <= alpha < 1, scale > 0 and n - k > p.
  void validate() const;
  friend bool operator==(const RobustGenConfig&, const RobustGenConfig&) = default;
};

enum class DatasetKind { sparse, robust };

std::string to_string(DatasetKind kind);

struct Dataset {
  DatasetKind kind = DatasetKind::sparse;
  DenseMatrix x;
  Vector y;
  Vector w_star;
  std::vector<std::size_t> true_support;  // features (sparse) or corrupted rows (robust)
  std::optional<Vector> b_star;
  std::variant<SparseGenConfig, RobustGenConfig> provenance;

  std::size_t n() const noexcept { return x.rows(); }
  std::size_t p() const noexcept { return x.cols(); }
  /// s for sparse datasets, k for robust ones.
  std::size_t budget() const noexcept { return true_support.size(); }
  std::uint64_t seed() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Columns of X ~ N(0,1) normalized to unit norm; w* ~ N(0,1) normalized;
/// y_clean = X w*; b uniform on +-scale*||y_clean||_inf over a uniform k-subset.
/// X and w* depend only on (seed, n, p), so an alpha sweep at one seed shares them.
Dataset gen_robust(const RobustGenConfig& config);

/// X with unit-norm N(0,1) columns, uniform s-subset support with N(0,1)
/// weights, y = X w* + N(0, sigma^2) noise.
Dataset gen_sparse(const SparseGenConfig& config);

/// Self-describing JSON document; reals are written in shortest round-trip form.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
std::string dataset_to_text(const Dataset& ds);
/// Throws ParseError naming the offending field.
Dataset load_dataset(const std::filesystem::path& path);
Dataset dataset_from_text(const std::string& text);

inline constexpr int kDatasetFormatVersion = 1;

}  // namespace qieo
