#include <chrono>
#include <cmath>

#include "qieo/baselines.hpp"
#include "qieo/error.hpp"
#include "qieo/simd/kernels.hpp"

namespace qieo {

SolverResult run_iht(const SparseRecoveryProblem& problem, const IhtConfig& config) {
  if (config.step_size && !(*config.step_size > 0.0 && std::isfinite(*config.step_size))) {
    throw ContractViolation("IHT step_size must be positive");
  }
  if (config.max_iterations < 1) throw ContractViolation("IHT max_iterations must be >= 1");
  const auto started = std::chrono::steady_clock::now();
  const DenseMatrix& x = problem.design();
  const Vector& y = problem.response();
  const std::size_t p = x.cols();
  const std::size_t s = problem.sparsity();
  const double eta = config.step_size ? *config.step_size : 1.0 / spectral_norm_sq(x);

  Vector w(p, 0.0);
  std::vector<std::size_t> support;
  std::size_t iterations = 0;
  while (iterations < config.max_iterations) {
    ++iterations;
    Vector r = y;
    const Vector xw = x.multiply(w);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= xw[i];
    Vector v = x.transpose_multiply(r);
    for (std::size_t j = 0; j < p; ++j) v[j] = w[j] + eta * v[j];
    support = top_magnitudes(v, s);
    Vector next(p, 0.0);
    for (std::size_t j : support) next[j] = v[j];
    double change = 0.0;
    for (std::size_t j = 0; j < p; ++j) change += (next[j] - w[j]) * (next[j] - w[j]);
    w = std::move(next);
    if (!std::isfinite(change)) throw SolverError("IHT diverged: non-finite iterate");
    if (std::sqrt(change) <= config.convergence_tol) break;
  }

  // Debias on the final support.
  SolverResult result;
  result.best_bits = CandidateSupport::from_indices(p, support);
  FitnessOutcome fit = problem.decode(result.best_bits);
  result.best_fitness = fit.fitness;
  result.weights = std::move(fit.weights);
  result.generations_run = iterations;
  result.history.emplace_back(iterations - 1, result.best_fitness);
  result.wall_time = std::chrono::steady_clock::now() - started;
  return result;
}

}  // namespace qieo
