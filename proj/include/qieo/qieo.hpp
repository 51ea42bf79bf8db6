#pragma once

// Quantum-inspired evolutionary optimization over fixed-length bitstrings.
//
// Each individual is a register of m independent qubits. A qubit is stored as
// its amplitude angle phi, so (alpha, beta) = (cos phi, sin phi) is normalized
// by construction and P(bit = 1) = sin^2 phi. The loop is: Hadamard start
// (phi = pi/4), measure every register, repair + evaluate, archive the global
// best on strict improvement, rotate every register toward the best, repeat.

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "qieo/problems.hpp"
#include "qieo/rng.hpp"
#include "qieo/support.hpp"

namespace qieo {

struct RotationPolicy {
  double delta = 0.02 * std::numbers::pi;    // R_Y angle per mismatch; amplitude angle moves delta/2
  double phi_min = 0.01 * std::numbers::pi;
  double phi_max = 0.49 * std::numbers::pi;

  /// Throws ContractViolation unless 0 < delta < pi/2 and 0 < phi_min < phi_max < pi/2.
  void validate() const;
};

struct QieoConfig {
  std::size_t population_size = 50;
  std::size_t max_generations = 1000;
  std::size_t stall_window = 0;    // 0 disables the stall stop
  double fitness_tolerance = 0.0;  // stop once best fitness <= this
  std::uint64_t seed = 0;
  RotationPolicy rotation;
  std::size_t eval_threads = 1;    // results do not depend on this

  void validate() const;
};

class QubitRegister {
 public:
  QubitRegister() = default;
  QubitRegister(std::size_t m, double angle) : angles_(m, angle) {}

  std::size_t size() const noexcept { return angles_.size(); }
  double angle(std::size_t i) const { return angles_[i]; }
  void set_angle(std::size_t i, double phi) { angles_[i] = phi; }
  std::span<const double> angles() const noexcept { return angles_; }

  double alpha(std::size_t i) const;
  double beta(std::size_t i) const;
  /// |beta_i|^2
  double probability_one(std::size_t i) const;

  friend bool operator==(const QubitRegister&, const QubitRegister&) = default;

 private:
  std::vector<double> angles_;
};

/// Every qubit in |+>: phi = pi/4. Throws ContractViolation unless population_size >= 2 and m >= 1.
std::vector<QubitRegister> init_population(std::size_t population_size, std::size_t m);

/// Independent Bernoulli(sin^2 phi_i) per qubit; exactly m uniform draws, in order.
CandidateSupport measure(const QubitRegister& reg, Rng& rng);

/// Per qubit: unchanged when observed_i == best_i, otherwise phi moves delta/2
/// toward pi/2 (best_i = 1) or toward 0 (best_i = 0), clamped to [phi_min, phi_max].
QubitRegister rotate(const QubitRegister& reg, const CandidateSupport& observed,
                     const CandidateSupport& best, const RotationPolicy& policy);

/// Runs the measure / evaluate / archive / rotate loop until max_generations,
/// the fitness tolerance or the stall window. Individual i of generation g
/// draws from Rng::substream(seed, g * population_size + i), so the result is
/// bit-identical for any eval_threads.
/// Throws SolverError naming the bitstring if the problem returns a non-finite fitness.
SolverResult run_qieo(const FitnessOracle& problem, const QieoConfig& config);

}  // namespace qieo
