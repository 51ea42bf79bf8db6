#include <chrono>
#include <cstdio>

#include "qieo/baselines.hpp"
#include "qieo/error.hpp"
#include "qieo/simd/kernels.hpp"

namespace qieo {

SolverResult run_amrr(const RobustRegressionProblem& problem, const AmrrConfig& config) {
  if (config.max_iterations < 1) throw ContractViolation("AM-RR max_iterations must be >= 1");
  const auto started = std::chrono::steady_clock::now();
  const DenseMatrix& x = problem.design();
  const auto y = problem.response();
  const std::size_t n = x.rows();
  const std::size_t k = problem.corruption_budget();

  SolverResult result;
  CandidateSupport current(n);  // start from all-rows OLS
  FitnessOutcome fit = problem.decode(current);
  double previous_sse = -1.0;
  std::size_t iteration = 0;
  while (iteration < config.max_iterations) {
    ++iteration;
    Vector r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - simd::dot(x.row(i), fit.weights);
    const CandidateSupport next = CandidateSupport::from_indices(n, top_magnitudes(r, k));
    if (next == current) break;
    current = next;
    fit = problem.decode(current);
    const double sse = fit.fitness * static_cast<double>(n - k);
    if (previous_sse >= 0.0 && sse > previous_sse) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "clean-set sse rose from %.17g to %.17g at iteration %zu",
                    previous_sse, sse, iteration);
      result.notes.emplace_back(buf);
    }
    previous_sse = sse;
    const double best_so_far = result.history.empty() ? fit.fitness
                                                      : std::min(result.history.back().second, fit.fitness);
    result.history.emplace_back(iteration - 1, best_so_far);
  }
  if (result.history.empty()) result.history.emplace_back(0, fit.fitness);

  result.best_bits = std::move(current);
  result.best_fitness = fit.fitness;
  result.weights = std::move(fit.weights);
  result.corruption = std::move(fit.corruption);
  result.generations_run = iteration;
  result.wall_time = std::chrono::steady_clock::now() - started;
  return result;
}

}  // namespace qieo
