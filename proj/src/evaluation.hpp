#pragma once

#include <cmath>
#include <span>
#include <unordered_map>
#include <vector>

#include "qieo/error.hpp"
#include "qieo/parallel.hpp"
#include "qieo/problems.hpp"

namespace qieo::detail {

// Memo of feasible bitstring -> fitness for one solver run. Scores are pure, so
// the memo never changes results, only how often the oracle is called.
class EvaluationCache {
 public:
  explicit EvaluationCache(std::size_t m)
      : capacity_(std::max<std::size_t>(4096, (std::size_t{96} << 20) / (m + 96))) {}

  void evaluate(const FitnessOracle& problem, std::span<const CandidateSupport> candidates,
                std::span<double> fitness, std::size_t threads, const ScoreHint* hint = nullptr) {
    std::vector<std::size_t> pending;
    std::unordered_map<CandidateSupport, std::size_t, CandidateSupportHash> first_seen;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (auto it = memo_.find(candidates[i]); it != memo_.end()) {
        fitness[i] = it->second;
        continue;
      }
      if (first_seen.try_emplace(candidates[i], i).second) pending.push_back(i);
    }
    std::vector<double> scored(pending.size());
    parallel_for(pending.size(), threads,
                 [&](std::size_t t) { scored[t] = problem.score_near(candidates[pending[t]], hint); });
    evaluations_ += pending.size();
    if (memo_.size() + pending.size() > capacity_) memo_.clear();
    for (std::size_t t = 0; t < pending.size(); ++t) {
      if (!std::isfinite(scored[t]) || scored[t] < 0.0) {
        throw SolverError("non-finite or negative fitness " + std::to_string(scored[t]) +
                          " for bitstring " + candidates[pending[t]].to_string());
      }
      memo_.emplace(candidates[pending[t]], scored[t]);
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (auto it = first_seen.find(candidates[i]); it != first_seen.end()) {
        fitness[i] = memo_.at(candidates[i]);
      }
    }
  }

  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  std::size_t capacity_;
  std::size_t evaluations_ = 0;
  std::unordered_map<CandidateSupport, double, CandidateSupportHash> memo_;
};

}  // namespace qieo::detail
