#include <algorithm>
#include <chrono>
#include <numeric>

#include "../evaluation.hpp"
#include "qieo/baselines.hpp"
#include "qieo/error.hpp"
#include "qieo/parallel.hpp"

namespace qieo {

void GaConfig::validate() const {
  if (population_size < 2 || population_size % 2 != 0) {
    throw ContractViolation("GA population_size must be even and >= 2");
  }
  if (generations < 1) throw ContractViolation("GA generations must be >= 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw ContractViolation("GA crossover_rate must lie in [0, 1]");
  }
  if (mutation_rate && !(*mutation_rate >= 0.0 && *mutation_rate <= 1.0)) {
    throw ContractViolation("GA mutation_rate must lie in [0, 1]");
  }
  if (tournament_size < 1) throw ContractViolation("GA tournament_size must be >= 1");
  if (elitism_count > population_size) {
    throw ContractViolation("GA elitism_count cannot exceed population_size");
  }
}

namespace {

struct GaState {
  const FitnessOracle& problem;
  const GaConfig& config;
  double mutation_rate;
  detail::EvaluationCache cache;
};

std::size_t tournament(std::span<const double> fitness, std::size_t size, Rng& rng) {
  std::size_t winner = rng.below(fitness.size());
  for (std::size_t t = 1; t < size; ++t) {
    const std::size_t c = rng.below(fitness.size());
    if (fitness[c] < fitness[winner] || (fitness[c] == fitness[winner] && c < winner)) winner = c;
  }
  return winner;
}

// One generation: elites carried over in their original order, the rest bred in pairs.
std::vector<CandidateSupport> breed(GaState& st, const std::vector<CandidateSupport>& pop,
                                    std::span<const double> fitness, std::size_t gen) {
  const std::size_t n = pop.size();
  const std::size_t m = st.problem.dimension();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
  std::vector<std::size_t> elites(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(st.config.elitism_count));
  std::sort(elites.begin(), elites.end());

  std::vector<CandidateSupport> next;
  next.reserve(n);
  for (std::size_t e : elites) next.push_back(pop[e]);
  const std::size_t children = n - next.size();
  const std::size_t pairs = (children + 1) / 2;
  std::vector<CandidateSupport> bred(pairs * 2);
  parallel_for(pairs, st.config.eval_threads, [&](std::size_t c) {
    Rng rng = Rng::substream(st.config.seed, static_cast<std::uint64_t>(gen) * n + c);
    const std::size_t pa = tournament(fitness, st.config.tournament_size, rng);
    const std::size_t pb = tournament(fitness, st.config.tournament_size, rng);
    CandidateSupport a = pop[pa];
    CandidateSupport b = pop[pb];
    if (rng.uniform() < st.config.crossover_rate) {
      for (std::size_t i = 0; i < m; ++i) {
        if (rng.uniform() < 0.5) {
          const bool t = a.test(i);
          a.set(i, b.test(i));
          b.set(i, t);
        }
      }
    }
    for (CandidateSupport* child : {&a, &b}) {
      if (st.mutation_rate > 0.0) {
        for (std::size_t i = 0; i < m; ++i) {
          if (rng.uniform() < st.mutation_rate) child->set(i, !child->test(i));
        }
      }
      st.problem.make_feasible(*child, rng);
    }
    bred[2 * c] = std::move(a);
    bred[2 * c + 1] = std::move(b);
  });
  for (std::size_t c = 0; c < children; ++c) next.push_back(std::move(bred[c]));
  return next;
}

std::vector<CandidateSupport> initial_population(const FitnessOracle& problem, const GaConfig& config) {
  const std::size_t m = problem.dimension();
  std::vector<CandidateSupport> pop(config.population_size, CandidateSupport(m));
  parallel_for(pop.size(), config.eval_threads, [&](std::size_t i) {
    Rng rng = Rng::substream(config.seed, i);
    for (std::size_t b = 0; b < m; ++b) pop[i].set(b, rng.uniform() < 0.5);
    problem.make_feasible(pop[i], rng);
  });
  return pop;
}

}  // namespace

std::vector<CandidateSupport> ga_evolve_population(const FitnessOracle& problem,
                                                   const GaConfig& config,
                                                   std::vector<CandidateSupport> population) {
  config.validate();
  const std::size_t m = problem.dimension();
  GaState st{problem, config, config.mutation_rate.value_or(1.0 / static_cast<double>(m)),
             detail::EvaluationCache(m)};
  std::vector<double> fitness(population.size());
  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    st.cache.evaluate(problem, population, fitness, config.eval_threads);
    population = breed(st, population, fitness, gen);
  }
  return population;
}

SolverResult run_ga(const FitnessOracle& problem, const GaConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::size_t m = problem.dimension();
  GaState st{problem, config, config.mutation_rate.value_or(1.0 / static_cast<double>(m)),
             detail::EvaluationCache(m)};
  std::vector<CandidateSupport> pop = initial_population(problem, config);
  std::vector<double> fitness(pop.size());
  SolverResult result;
  bool have_best = false;

  for (std::size_t gen = 0; gen < config.generations; ++gen) {
    st.cache.evaluate(problem, pop, fitness, config.eval_threads);
    const auto leader = static_cast<std::size_t>(
        std::min_element(fitness.begin(), fitness.end()) - fitness.begin());
    if (!have_best || fitness[leader] < result.best_fitness) {
      result.best_fitness = fitness[leader];
      result.best_bits = pop[leader];
      have_best = true;
    }
    result.history.emplace_back(gen, result.best_fitness);
    result.generations_run = gen + 1;
    if (result.best_fitness <= config.fitness_tolerance || gen + 1 == config.generations) break;
    pop = breed(st, pop, fitness, gen + 1);
  }

  FitnessOutcome decoded = problem.decode(result.best_bits);
  result.weights = std::move(decoded.weights);
  result.corruption = std::move(decoded.corruption);
  result.wall_time = std::chrono::steady_clock::now() - started;
  return result;
}

}  // namespace qieo
