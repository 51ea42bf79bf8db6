#pragma once

// l0-constrained objectives encoded as bitstring fitness oracles.

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qieo/numerics.hpp"
#include "qieo/rng.hpp"
#include "qieo/support.hpp"

namespace qieo {

struct FitnessOutcome {
  double fitness = 0.0;  // MSE, lower is better
  Vector weights;
  std::optional<Vector> corruption;
};

/// Problem-specific precomputation around a reference bitstring that makes
/// scoring nearby bitstrings cheaper. Opaque to solvers.
class ScoreHint {
 public:
  virtual ~ScoreHint() = default;
};

/// What a population solver needs from a problem: a fixed bitstring length, an
/// optional exact-popcount budget enforced by repair, and a pure score.
class FitnessOracle {
 public:
  virtual ~FitnessOracle() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::optional<std::size_t> budget() const { return std::nullopt; }

  /// Fitness of an already-feasible bitstring; must be pure and thread-safe.
  virtual double score(const CandidateSupport& feasible) const = 0;

  /// Optional speed-up: a hint built at `reference` that score_near may use.
  /// Returning nullptr (the default) is always allowed.
  virtual std::shared_ptr<const ScoreHint> make_hint(const CandidateSupport& reference) const {
    (void)reference;
    return nullptr;
  }

  /// score(feasible), possibly computed through `hint`; equal up to rounding.
  virtual double score_near(const CandidateSupport& feasible, const ScoreHint* hint) const {
    (void)hint;
    return score(feasible);
  }

  /// Full decoded model for a feasible bitstring. Default carries fitness only.
  virtual FitnessOutcome decode(const CandidateSupport& feasible) const {
    return {score(feasible), {}, std::nullopt};
  }

  /// Applies the budget repair, if any.
  void make_feasible(CandidateSupport& bits, Rng& rng) const {
    if (auto b = budget()) repair(bits, *b, rng);
  }
};

/// min ||y - X w||^2 subject to ||w||_0 <= s, searched over exact-s supports.
class SparseRecoveryProblem final : public FitnessOracle {
 public:
  /// Throws ContractViolation unless X.rows == |y|, n >= 1 and 1 <= s <= p.
  SparseRecoveryProblem(DenseMatrix x, Vector y, std::size_t s);

  std::size_t dimension() const override { return x_.cols(); }
  std::optional<std::size_t> budget() const override { return s_; }
  double score(const CandidateSupport& feasible) const override;
  FitnessOutcome decode(const CandidateSupport& feasible) const override;

  const DenseMatrix& design() const noexcept { return x_; }
  const Vector& response() const noexcept { return y_; }
  std::size_t sparsity() const noexcept { return s_; }

 private:
  DenseMatrix x_;
  Vector y_;
  std::size_t s_;
};

/// min ||y - X w - b||^2 subject to ||b||_0 <= k. With the support S of b fixed,
/// rows in S are absorbed exactly by b, leaving OLS on the complement.
class RobustRegressionProblem final : public FitnessOracle {
 public:
  /// Throws ContractViolation on dimension mismatch and InfeasibleBudget unless k < n - p.
  RobustRegressionProblem(DenseMatrix x, Vector y, std::size_t k);

  std::size_t dimension() const override { return gram_.matrix().rows(); }
  std::optional<std::size_t> budget() const override { return k_; }
  /// (SSE over rows outside S) / (n - k).
  double score(const CandidateSupport& feasible) const override;
  /// Anchors the clean-row normal equations at `reference`; bitstrings within a
  /// few rows of it are then scored by a low-rank update.
  std::shared_ptr<const ScoreHint> make_hint(const CandidateSupport& reference) const override;
  double score_near(const CandidateSupport& feasible, const ScoreHint* hint) const override;
  /// weights from the clean-row fit; corruption b_i = y_i - x_i^T w on S, 0 elsewhere.
  FitnessOutcome decode(const CandidateSupport& feasible) const override;

  const DenseMatrix& design() const noexcept { return gram_.matrix(); }
  std::span<const double> response() const noexcept { return gram_.response(); }
  std::size_t corruption_budget() const noexcept { return k_; }

 private:
  LeastSquaresSolution fit(const CandidateSupport& feasible,
                           const GramSystem::Anchor* anchor = nullptr) const;

  GramSystem gram_;
  std::size_t k_;
};

/// Repair to exactly s, then fit on the selected columns; fitness = sse / n.
FitnessOutcome sparse_fitness(const SparseRecoveryProblem& problem, CandidateSupport bits, Rng& rng);

/// Repair to exactly k, then OLS on the complement; fitness = sse / (n - k).
FitnessOutcome robust_fitness(const RobustRegressionProblem& problem, CandidateSupport bits, Rng& rng);

struct OracleOptimum {
  CandidateSupport support;
  double fitness = 0.0;
  std::size_t evaluated = 0;
};

/// Largest number of supports brute_force_oracle will enumerate.
inline constexpr double kOracleGuard = 2e6;

/// binomial(m, k) as a double (exact below 2^53).
double binomial(std::size_t m, std::size_t k);

/// Exhaustive minimum over every support with exactly `exact_budget` ones, in
/// lexicographic order of index sets; the first minimizer wins ties.
/// Throws GuardRefusal when binomial(m, exact_budget) > kOracleGuard.
OracleOptimum brute_force_oracle(const FitnessOracle& problem, std::size_t exact_budget);

/// Outcome shared by QIEO and every baseline.
struct SolverResult {
  CandidateSupport best_bits;
  double best_fitness = 0.0;
  Vector weights;
  std::optional<Vector> corruption;
  std::size_t generations_run = 0;
  std::vector<std::pair<std::size_t, double>> history;  // (generation, best fitness)
  std::chrono::nanoseconds wall_time{0};
  std::vector<std::string> notes;  // non-fatal diagnostics
};

}  // namespace qieo
