#include "qieo/qieo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "evaluation.hpp"
#include "qieo/error.hpp"
#include "qieo/parallel.hpp"

namespace qieo {

void RotationPolicy::validate() const {
  constexpr double half_pi = std::numbers::pi / 2;
  if (!(delta > 0.0 && delta < half_pi)) {
    throw ContractViolation("rotation delta must lie in (0, pi/2), got " + std::to_string(delta));
  }
  if (!(phi_min > 0.0 && phi_min < phi_max && phi_max < half_pi)) {
    throw ContractViolation("rotation clamp must satisfy 0 < phi_min < phi_max < pi/2");
  }
}

void QieoConfig::validate() const {
  if (population_size < 2) throw ContractViolation("QIEO population_size must be >= 2");
  if (max_generations < 1) throw ContractViolation("QIEO max_generations must be >= 1");
  if (!(fitness_tolerance >= 0.0)) throw ContractViolation("QIEO fitness_tolerance must be >= 0");
  rotation.validate();
}

double QubitRegister::alpha(std::size_t i) const { return std::cos(angles_[i]); }
double QubitRegister::beta(std::size_t i) const { return std::sin(angles_[i]); }
double QubitRegister::probability_one(std::size_t i) const {
  const double b = std::sin(angles_[i]);
  return b * b;
}

std::vector<QubitRegister> init_population(std::size_t population_size, std::size_t m) {
  if (population_size < 2) throw ContractViolation("init_population: population_size must be >= 2");
  if (m < 1) throw ContractViolation("init_population: m must be >= 1");
  // H|0> = (|0> + |1>)/sqrt(2)
  return std::vector<QubitRegister>(population_size, QubitRegister(m, std::numbers::pi / 4));
}

CandidateSupport measure(const QubitRegister& reg, Rng& rng) {
  CandidateSupport out(reg.size());
  for (std::size_t i = 0; i < reg.size(); ++i) {
    const double u = rng.uniform();
    if (u < reg.probability_one(i)) out.set(i);
  }
  return out;
}

QubitRegister rotate(const QubitRegister& reg, const CandidateSupport& observed,
                     const CandidateSupport& best, const RotationPolicy& policy) {
  if (observed.size() != reg.size() || best.size() != reg.size()) {
    throw ContractViolation("rotate: register, observed and best must have equal length");
  }
  QubitRegister out = reg;
  const double step = policy.delta / 2;
  for (std::size_t i = 0; i < reg.size(); ++i) {
    if (observed.test(i) == best.test(i)) continue;
    const double phi = reg.angle(i) + (best.test(i) ? step : -step);
    out.set_angle(i, std::clamp(phi, policy.phi_min, policy.phi_max));
  }
  return out;
}

SolverResult run_qieo(const FitnessOracle& problem, const QieoConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::size_t m = problem.dimension();
  const std::size_t pop = config.population_size;
  std::vector<QubitRegister> registers = init_population(pop, m);
  // Rotation compares each register with what it actually measured; the
  // repaired copy is only what gets scored. Repair flips are random, so
  // steering by them would push qubits in directions the register never chose.
  std::vector<CandidateSupport> measured(pop);
  std::vector<CandidateSupport> feasible(pop);
  std::vector<double> fitness(pop);
  detail::EvaluationCache cache(m);

  SolverResult result;
  std::shared_ptr<const ScoreHint> hint;
  bool have_best = false;
  std::size_t last_improvement = 0;

  for (std::size_t gen = 0; gen < config.max_generations; ++gen) {
    parallel_for(pop, config.eval_threads, [&](std::size_t i) {
      Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(gen) * pop + i);
      measured[i] = measure(registers[i], rng);
      feasible[i] = measured[i];
      problem.make_feasible(feasible[i], rng);
    });
    cache.evaluate(problem, feasible, fitness, config.eval_threads, hint.get());

    std::size_t leader = 0;
    for (std::size_t i = 1; i < pop; ++i) {
      if (fitness[i] < fitness[leader]) leader = i;
    }
    if (!have_best || (fitness[leader] < result.best_fitness && feasible[leader] != result.best_bits)) {
      result.best_fitness = fitness[leader];
      result.best_bits = feasible[leader];
      have_best = true;
      last_improvement = gen;
      hint = problem.make_hint(result.best_bits);
    }
    result.history.emplace_back(gen, result.best_fitness);
    result.generations_run = gen + 1;

    if (result.best_fitness <= config.fitness_tolerance) break;
    if (config.stall_window > 0 && gen - last_improvement >= config.stall_window) break;
    if (gen + 1 == config.max_generations) break;

    parallel_for(pop, config.eval_threads, [&](std::size_t i) {
      registers[i] = rotate(registers[i], measured[i], result.best_bits, config.rotation);
    });
  }

  FitnessOutcome decoded = problem.decode(result.best_bits);
  result.weights = std::move(decoded.weights);
  result.corruption = std::move(decoded.corruption);
  result.wall_time = std::chrono::steady_clock::now() - started;
  return result;
}

}  // namespace qieo
