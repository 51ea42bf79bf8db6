#include "qieo/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "qieo/error.hpp"
#include "qieo/simd/kernels.hpp"

namespace qieo {

namespace {

void check_length(const CandidateSupport& bits, std::size_t m, const char* who) {
  if (bits.size() != m) {
    throw ContractViolation(std::string(who) + ": bitstring length " + std::to_string(bits.size()) +
                            " != " + std::to_string(m));
  }
}

const DenseMatrix& require_rows(const DenseMatrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw ContractViolation("RobustRegressionProblem: X rows != |y|");
  return x;
}

}  // namespace

SparseRecoveryProblem::SparseRecoveryProblem(DenseMatrix x, Vector y, std::size_t s)
    : x_(std::move(x)), y_(std::move(y)), s_(s) {
  if (x_.rows() != y_.size()) throw ContractViolation("SparseRecoveryProblem: X rows != |y|");
  if (x_.rows() == 0) throw ContractViolation("SparseRecoveryProblem: n must be >= 1");
  if (s_ < 1 || s_ > x_.cols()) {
    throw ContractViolation("SparseRecoveryProblem: need 1 <= s <= p, got s=" + std::to_string(s_) +
                            ", p=" + std::to_string(x_.cols()));
  }
}

double SparseRecoveryProblem::score(const CandidateSupport& feasible) const {
  check_length(feasible, x_.cols(), "SparseRecoveryProblem");
  const auto idx = feasible.indices();
  return restricted_least_squares(x_, y_, idx).sse / static_cast<double>(x_.rows());
}

FitnessOutcome SparseRecoveryProblem::decode(const CandidateSupport& feasible) const {
  check_length(feasible, x_.cols(), "SparseRecoveryProblem");
  const auto idx = feasible.indices();
  RestrictedFit fit = restricted_least_squares(x_, y_, idx);
  return {fit.sse / static_cast<double>(x_.rows()), std::move(fit.weights), std::nullopt};
}

RobustRegressionProblem::RobustRegressionProblem(DenseMatrix x, Vector y, std::size_t k)
    : gram_(require_rows(x, y), y), k_(k) {
  const std::size_t n = gram_.matrix().rows();
  const std::size_t p = gram_.matrix().cols();
  if (n == 0 || p == 0) throw ContractViolation("RobustRegressionProblem: empty design");
  if (k_ >= n || n - k_ <= p) {
    throw InfeasibleBudget("RobustRegressionProblem: corruption budget k=" + std::to_string(k_) +
                           " leaves " + std::to_string(k_ >= n ? 0 : n - k_) +
                           " clean rows, need more than p=" + std::to_string(p));
  }
}

namespace {

struct GramHint final : ScoreHint {
  std::shared_ptr<const GramSystem::Anchor> anchor;
};

}  // namespace

LeastSquaresSolution RobustRegressionProblem::fit(const CandidateSupport& feasible,
                                                  const GramSystem::Anchor* anchor) const {
  check_length(feasible, dimension(), "RobustRegressionProblem");
  const auto corrupted = feasible.indices();
  const std::size_t n = dimension();
  const std::size_t p = gram_.matrix().cols();
  if (n - corrupted.size() < p) {
    throw InfeasibleBudget("RobustRegressionProblem: " + std::to_string(corrupted.size()) +
                           " presumed-corrupted rows leave fewer than p clean rows");
  }
  return gram_.solve_excluding(corrupted, anchor);
}

double RobustRegressionProblem::score(const CandidateSupport& feasible) const {
  const std::size_t clean = dimension() - feasible.count();
  return fit(feasible).sse / static_cast<double>(clean);
}

std::shared_ptr<const ScoreHint> RobustRegressionProblem::make_hint(const CandidateSupport& reference) const {
  check_length(reference, dimension(), "RobustRegressionProblem");
  auto anchor = gram_.make_anchor(reference.indices());
  if (!anchor) return nullptr;
  auto hint = std::make_shared<GramHint>();
  hint->anchor = std::move(anchor);
  return hint;
}

double RobustRegressionProblem::score_near(const CandidateSupport& feasible, const ScoreHint* hint) const {
  const auto* gram_hint = dynamic_cast<const GramHint*>(hint);
  const std::size_t clean = dimension() - feasible.count();
  return fit(feasible, gram_hint ? gram_hint->anchor.get() : nullptr).sse / static_cast<double>(clean);
}

FitnessOutcome RobustRegressionProblem::decode(const CandidateSupport& feasible) const {
  LeastSquaresSolution ls = fit(feasible);
  const std::size_t n = dimension();
  const std::size_t clean = n - feasible.count();
  Vector b(n, 0.0);
  const auto& x = gram_.matrix();
  const auto y = gram_.response();
  for (std::size_t i = 0; i < n; ++i) {
    if (feasible.test(i)) b[i] = y[i] - simd::dot(x.row(i), ls.coeffs);
  }
  return {ls.sse / static_cast<double>(clean), std::move(ls.coeffs), std::move(b)};
}

FitnessOutcome sparse_fitness(const SparseRecoveryProblem& problem, CandidateSupport bits, Rng& rng) {
  check_length(bits, problem.dimension(), "sparse_fitness");
  problem.make_feasible(bits, rng);
  return problem.decode(bits);
}

FitnessOutcome robust_fitness(const RobustRegressionProblem& problem, CandidateSupport bits, Rng& rng) {
  check_length(bits, problem.dimension(), "robust_fitness");
  problem.make_feasible(bits, rng);
  return problem.decode(bits);
}

double binomial(std::size_t m, std::size_t k) {
  if (k > m) return 0.0;
  k = std::min(k, m - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(m - k + i) / static_cast<double>(i);
  }
  return std::round(c);
}

OracleOptimum brute_force_oracle(const FitnessOracle& problem, std::size_t exact_budget) {
  const std::size_t m = problem.dimension();
  if (exact_budget > m) {
    throw ContractViolation("brute_force_oracle: budget " + std::to_string(exact_budget) +
                            " exceeds length " + std::to_string(m));
  }
  const double count = binomial(m, exact_budget);
  if (count > kOracleGuard) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", count);
    throw GuardRefusal("brute_force_oracle: binomial(" + std::to_string(m) + ", " +
                           std::to_string(exact_budget) + ") = " + buf + " supports exceeds the " +
                           "enumeration guard of 2e6",
                       count);
  }
  // Lexicographic walk over combinations c[0] < c[1] < ... < c[k-1].
  std::vector<std::size_t> c(exact_budget);
  std::iota(c.begin(), c.end(), std::size_t{0});
  OracleOptimum best;
  bool have = false;
  CandidateSupport bits(m);
  while (true) {
    for (std::size_t i = 0; i < m; ++i) bits.set(i, false);
    for (std::size_t i : c) bits.set(i);
    const double f = problem.score(bits);
    if (!std::isfinite(f)) {
      throw SolverError("brute_force_oracle: non-finite fitness for " + bits.to_string());
    }
    ++best.evaluated;
    if (!have || f < best.fitness) {
      best.fitness = f;
      best.support = bits;
      have = true;
    }
    std::size_t i = exact_budget;
    while (i > 0 && c[i - 1] == m - exact_budget + (i - 1)) --i;
    if (i == 0) break;
    ++c[i - 1];
    for (std::size_t j = i; j < exact_budget; ++j) c[j] = c[j - 1] + 1;
  }
  return best;
}

}  // namespace qieo
