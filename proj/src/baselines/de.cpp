#include <algorithm>
#include <chrono>
#include <cmath>

#include "qieo/baselines.hpp"
#include "qieo/error.hpp"
#include "qieo/simd/kernels.hpp"

namespace qieo {

void DeConfig::validate() const {
  if (population_size < 4) throw ContractViolation("DE population_size must be >= 4");
  if (generations < 1) throw ContractViolation("DE generations must be >= 1");
  if (!(differential_weight > 0.0 && differential_weight < 2.0)) {
    throw ContractViolation("DE differential_weight must lie in (0, 2)");
  }
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) {
    throw ContractViolation("DE crossover_prob must lie in [0, 1]");
  }
  if (!(l1_weight >= 0.0)) throw ContractViolation("DE l1_weight must be >= 0");
  if (!(support_threshold >= 0.0)) throw ContractViolation("DE support_threshold must be >= 0");
  if (!(init_range > 0.0)) throw ContractViolation("DE init_range must be positive");
}

namespace {

double relaxed_objective(const SparseRecoveryProblem& problem, const Vector& w, double lambda) {
  const Vector xw = problem.design().multiply(w);
  double sse = 0.0;
  for (std::size_t i = 0; i < xw.size(); ++i) {
    const double e = problem.response()[i] - xw[i];
    sse += e * e;
  }
  double l1 = 0.0;
  for (double v : w) l1 += std::abs(v);
  return sse / static_cast<double>(xw.size()) + lambda * l1;
}

}  // namespace

SolverResult run_de(const SparseRecoveryProblem& problem, const DeConfig& config,
                    std::vector<Vector> initial, std::vector<Vector>* final_population) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::size_t p = problem.dimension();
  const std::size_t np = config.population_size;

  std::vector<Vector> pop = std::move(initial);
  if (pop.empty()) {
    pop.assign(np, Vector(p));
    for (std::size_t i = 0; i < np; ++i) {
      Rng rng = Rng::substream(config.seed, i);
      for (double& v : pop[i]) v = rng.uniform(-config.init_range, config.init_range);
    }
  } else if (pop.size() != np) {
    throw ContractViolation("DE initial population size does not match population_size");
  }
  for (const Vector& ind : pop) {
    if (ind.size() != p) throw ContractViolation("DE initial individual has wrong length");
  }

  std::vector<double> cost(np);
  for (std::size_t i = 0; i < np; ++i) cost[i] = relaxed_objective(problem, pop[i], config.l1_weight);

  SolverResult result;
  auto record = [&](std::size_t gen) {
    const auto best = static_cast<std::size_t>(std::min_element(cost.begin(), cost.end()) - cost.begin());
    if (!std::isfinite(cost[best])) throw SolverError("DE produced a non-finite objective");
    result.history.emplace_back(gen, cost[best]);
    return best;
  };
  std::size_t best = record(0);

  // Synchronous generations: all trials are built from the previous population.
  for (std::size_t gen = 1; gen < config.generations; ++gen) {
    std::vector<Vector> next = pop;
    for (std::size_t i = 0; i < np; ++i) {
      Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(gen) * np + i);
      std::size_t r[3];
      for (std::size_t t = 0; t < 3; ++t) {
        do {
          r[t] = rng.below(np);
        } while (r[t] == i || (t > 0 && r[t] == r[0]) || (t > 1 && r[t] == r[1]));
      }
      const std::size_t jrand = rng.below(p);
      Vector trial = pop[i];
      for (std::size_t j = 0; j < p; ++j) {
        if (rng.uniform() < config.crossover_prob || j == jrand) {
          trial[j] = pop[r[0]][j] + config.differential_weight * (pop[r[1]][j] - pop[r[2]][j]);
        }
      }
      const double c = relaxed_objective(problem, trial, config.l1_weight);
      if (c <= cost[i]) {
        next[i] = std::move(trial);
        cost[i] = c;
      }
    }
    pop = std::move(next);
    best = record(gen);
  }

  const Vector& w = pop[best];
  result.best_bits = CandidateSupport(p);
  for (std::size_t j = 0; j < p; ++j) {
    if (std::abs(w[j]) > config.support_threshold) result.best_bits.set(j);
  }
  result.best_fitness = cost[best];
  result.weights = w;
  result.generations_run = config.generations;
  if (final_population) *final_population = std::move(pop);
  result.wall_time = std::chrono::steady_clock::now() - started;
  return result;
}

}  // namespace qieo
