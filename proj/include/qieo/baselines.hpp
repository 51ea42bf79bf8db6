#pragma once

// Comparison solvers: binary GA, IHT, ADAM and DE on the l1 relaxation, AM-RR.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qieo/problems.hpp"

namespace qieo {

struct GaConfig {
  std::size_t population_size = 100;
  std::size_t generations = 500;
  double crossover_rate = 0.9;           // uniform crossover
  std::optional<double> mutation_rate;   // per bit; unset means 1/m
  std::size_t tournament_size = 2;
  std::size_t elitism_count = 1;
  double fitness_tolerance = 0.0;        // early stop once best <= this
  std::uint64_t seed = 0;
  std::size_t eval_threads = 1;

  void validate() const;
};

/// Tournament selection, uniform crossover, per-bit mutation, budget repair and
/// elitism. Children of pair c in generation g draw from substream(seed, g * pop + c).
SolverResult run_ga(const FitnessOracle& problem, const GaConfig& config);

/// Population after `config.generations` steps, for fixed-point checks.
std::vector<CandidateSupport> ga_evolve_population(const FitnessOracle& problem,
                                                   const GaConfig& config,
                                                   std::vector<CandidateSupport> population);

struct IhtConfig {
  std::size_t max_iterations = 1000;
  std::optional<double> step_size;  // unset means 1 / sigma_max(X)^2
  double convergence_tol = 1e-12;   // on ||w_{t+1} - w_t||_2
};

/// w <- H_s(w + eta X^T (y - X w)) from w = 0, then least squares on the final support.
SolverResult run_iht(const SparseRecoveryProblem& problem, const IhtConfig& config);

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t iterations = 5000;
  double l1_weight = 0.01;
  double support_threshold = 0.02;

  void validate() const;
};

/// ADAM on ||y - X w||^2 / n + lambda ||w||_1 with the sign subgradient.
/// Reports the raw iterate (no debiasing); support is |w_j| > threshold.
SolverResult run_adam(const SparseRecoveryProblem& problem, const AdamConfig& config);
/// ADAM on ||y - X w - b||^2 / n + lambda ||b||_1 over (w, b); support is |b_i| > threshold.
SolverResult run_adam(const RobustRegressionProblem& problem, const AdamConfig& config);

struct DeConfig {
  std::size_t population_size = 50;
  std::size_t generations = 1000;
  double differential_weight = 0.8;
  double crossover_prob = 0.9;
  double l1_weight = 0.01;
  double support_threshold = 0.02;
  double init_range = 1.0;  // initial individuals uniform in [-init_range, init_range]^p
  std::uint64_t seed = 0;

  void validate() const;
};

/// rand/1/bin differential evolution on the same relaxed objective as sparse ADAM.
/// `initial` replaces the random start when non-empty; `final_population`, when
/// given, receives the last population.
SolverResult run_de(const SparseRecoveryProblem& problem, const DeConfig& config,
                    std::vector<Vector> initial = {},
                    std::vector<Vector>* final_population = nullptr);

struct AmrrConfig {
  std::size_t max_iterations = 200;
};

/// Alternates OLS on presumed-clean rows (starting from all rows) with taking
/// the k largest |residuals| as corrupted, until the corrupted set repeats.
SolverResult run_amrr(const RobustRegressionProblem& problem, const AmrrConfig& config);

/// Indices of the `count` largest |values|, ties to the lower index, returned sorted.
std::vector<std::size_t> top_magnitudes(std::span<const double> values, std::size_t count);

}  // namespace qieo
