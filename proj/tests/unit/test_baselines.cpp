#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qieo/baselines.hpp"
#include "qieo/datagen.hpp"
#include "qieo/error.hpp"

using namespace qieo;

namespace {

class PopcountDistance final : public FitnessOracle {
 public:
  explicit PopcountDistance(CandidateSupport target) : target_(std::move(target)) {}
  std::size_t dimension() const override { return target_.size(); }
  double score(const CandidateSupport& bits) const override {
    double d = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) d += bits.test(i) != target_.test(i);
    return d;
  }

 private:
  CandidateSupport target_;
};

// First p columns of the order-n Sylvester Hadamard matrix scaled by 1/sqrt(n):
// exactly orthonormal columns with entries +-1/sqrt(n).
DenseMatrix hadamard_columns(std::size_t n, std::size_t p) {
  DenseMatrix x(n, p);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = (__builtin_popcountll(i & j) % 2 ? -scale : scale);
  return x;
}

std::size_t nonzeros(std::span<const double> v) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double e) { return e != 0.0; }));
}

}  // namespace

TEST_CASE("top_magnitudes: ties go to the lower index, output sorted") {
  const Vector v = {1.0, -3.0, 3.0, 0.5, -1.0};
  CHECK(top_magnitudes(v, 2) == std::vector<std::size_t>{1, 2});
  CHECK(top_magnitudes(v, 3) == std::vector<std::size_t>{0, 1, 2});
  CHECK(top_magnitudes(v, 0).empty());
  CHECK(top_magnitudes(v, 5).size() == 5);
}

TEST_CASE("GA smoke: popcount distance reaches 0 within 500 generations in >= 90/100 seeds") {
  const PopcountDistance problem(CandidateSupport::from_string("0110111001"));
  GaConfig c;
  c.generations = 500;
  int solved = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    c.seed = seed;
    solved += run_ga(problem, c).best_fitness == 0.0;
  }
  CHECK(solved >= 90);
}

TEST_CASE("GA without variation and full elitism keeps its population") {
  const Dataset ds = gen_sparse({.n = 16, .p = 20, .s = 3, .seed = 2});
  const SparseRecoveryProblem problem(ds.x, ds.y, 3);
  GaConfig c;
  c.population_size = 10;
  c.generations = 25;
  c.crossover_rate = 0.0;
  c.mutation_rate = 0.0;
  c.elitism_count = 10;
  Rng rng(4);
  std::vector<CandidateSupport> start;
  for (int i = 0; i < 10; ++i) {
    CandidateSupport s(20);
    problem.make_feasible(s, rng);
    start.push_back(s);
  }
  auto end = ga_evolve_population(problem, c, start);
  std::sort(start.begin(), start.end());
  std::sort(end.begin(), end.end());
  CHECK(end == start);
}

TEST_CASE("GA is deterministic and its history is monotone") {
  const Dataset ds = gen_sparse({.n = 16, .p = 50, .s = 5, .seed = 1});
  const SparseRecoveryProblem problem(ds.x, ds.y, 5);
  GaConfig c;
  c.generations = 60;
  c.seed = 3;
  const auto a = run_ga(problem, c);
  c.eval_threads = 3;
  const auto b = run_ga(problem, c);
  CHECK(a.best_bits == b.best_bits);
  CHECK(a.history == b.history);
  for (std::size_t i = 1; i < a.history.size(); ++i) CHECK(a.history[i].second <= a.history[i - 1].second);
  CHECK(a.best_bits.count() == 5);
}

TEST_CASE("GA config validation") {
  GaConfig c;
  c.population_size = 7;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c.population_size = 8;
  c.crossover_rate = 1.5;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c.crossover_rate = 0.5;
  c.elitism_count = 9;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
}

TEST_CASE("IHT on an orthonormal design recovers the support in one step") {
  const std::size_t n = 32, p = 16;
  const DenseMatrix x = hadamard_columns(n, p);
  Vector w_star(p, 0.0);
  w_star[2] = 1.5;
  w_star[7] = -0.8;
  w_star[11] = 0.3;
  const Vector y = x.multiply(w_star);
  const SparseRecoveryProblem problem(x, y, 3);
  IhtConfig c;
  c.step_size = 1.0;
  c.max_iterations = 1;
  const auto r = run_iht(problem, c);
  CHECK(r.best_bits.indices() == std::vector<std::size_t>{2, 7, 11});
  CHECK(r.generations_run == 1);
  for (std::size_t j = 0; j < p; ++j) CHECK(r.weights[j] == doctest::Approx(w_star[j]).scale(1e-12));
  CHECK(r.best_fitness <= 1e-28);
}

TEST_CASE("IHT never beats the exhaustive optimum and keeps s nonzeros") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset ds = gen_sparse({.n = 12, .p = 10, .s = 2, .noise_sigma = 0.05, .seed = seed});
    const SparseRecoveryProblem problem(ds.x, ds.y, 2);
    const auto r = run_iht(problem, {});
    const double opt = brute_force_oracle(problem, 2).fitness;
    CHECK(r.best_fitness >= opt * (1 - 1e-12));
    CHECK(r.best_bits.count() == 2);
    CHECK(nonzeros(r.weights) <= 2);
  }
  IhtConfig bad;
  bad.step_size = -1.0;
  const Dataset ds = gen_sparse({.n = 12, .p = 10, .s = 2, .seed = 0});
  CHECK_THROWS_AS(run_iht(SparseRecoveryProblem(ds.x, ds.y, 2), bad), ContractViolation);
}

TEST_CASE("ADAM without penalty on an identity design converges toward y") {
  const Vector y = {0.5, -0.3, 0.01, 0.9, -0.015};
  const SparseRecoveryProblem problem(DenseMatrix::identity(5), y, 2);
  AdamConfig c;
  c.l1_weight = 0.0;
  const auto r = run_adam(problem, c);
  for (std::size_t j = 0; j < 5; ++j) CHECK(r.weights[j] == doctest::Approx(y[j]).epsilon(1e-3));
  // Only |y_j| > 0.02 enter the support; budget 2 does not cap a relaxation.
  CHECK(r.best_bits.indices() == std::vector<std::size_t>{0, 1, 3});
  CHECK(r.history.size() == 1);
}

TEST_CASE("ADAM on robust data reports corruption above the threshold") {
  const Dataset ds = gen_robust({.n = 120, .p = 5, .alpha = 0.1, .seed = 3});
  const RobustRegressionProblem problem(ds.x, ds.y, ds.budget());
  const auto r = run_adam(problem, {});
  REQUIRE(r.corruption.has_value());
  CHECK(r.corruption->size() == 120);
  for (std::size_t i = 0; i < 120; ++i) CHECK(r.best_bits.test(i) == (std::abs((*r.corruption)[i]) > 0.02));
  AdamConfig bad;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("DE: identical individuals with CR = 0 stay put") {
  const Dataset ds = gen_sparse({.n = 10, .p = 6, .s = 2, .seed = 5});
  const SparseRecoveryProblem problem(ds.x, ds.y, 2);
  DeConfig c;
  c.population_size = 8;
  c.generations = 30;
  c.crossover_prob = 0.0;
  const Vector ind = {0.1, -0.2, 0.3, 0.0, 0.5, -0.7};
  std::vector<Vector> final_pop;
  (void)run_de(problem, c, std::vector<Vector>(8, ind), &final_pop);
  REQUIRE(final_pop.size() == 8);
  for (const Vector& v : final_pop) CHECK(v == ind);
}

TEST_CASE("DE is deterministic with a monotone history") {
  const Dataset ds = gen_sparse({.n = 16, .p = 20, .s = 3, .seed = 6});
  const SparseRecoveryProblem problem(ds.x, ds.y, 3);
  DeConfig c;
  c.population_size = 12;
  c.generations = 100;
  c.seed = 8;
  const auto a = run_de(problem, c), b = run_de(problem, c);
  CHECK(a.weights == b.weights);
  CHECK(a.history == b.history);
  for (std::size_t i = 1; i < a.history.size(); ++i) CHECK(a.history[i].second <= a.history[i - 1].second);
  DeConfig bad;
  bad.differential_weight = 2.0;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
  bad = DeConfig{};
  bad.population_size = 3;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
}

TEST_CASE("AM-RR with k = 0 is a single OLS pass") {
  const Dataset ds = gen_robust({.n = 50, .p = 4, .alpha = 0.0, .seed = 9});
  const RobustRegressionProblem problem(ds.x, ds.y, 0);
  const auto r = run_amrr(problem, {});
  CHECK(r.best_bits.count() == 0);
  const auto ols = least_squares(ds.x, ds.y);
  for (std::size_t j = 0; j < 4; ++j) CHECK(r.weights[j] == doctest::Approx(ols.coeffs[j]).scale(1e-12));
}

TEST_CASE("AM-RR matches the exhaustive optimum on a tiny instance with large outliers") {
  Rng rng(10);
  for (int inst = 0; inst < 10; ++inst) {
    DenseMatrix x(20, 2);
    Vector y(20);
    const double w0 = rng.normal(), w1 = rng.normal();
    for (std::size_t i = 0; i < 20; ++i) {
      x(i, 0) = rng.normal();
      x(i, 1) = rng.normal();
      y[i] = w0 * x(i, 0) + w1 * x(i, 1);
    }
    y[3 + static_cast<std::size_t>(inst)] += 100.0;
    y[15] -= 100.0;
    const RobustRegressionProblem problem(x, y, 2);
    const auto r = run_amrr(problem, {});
    const auto opt = brute_force_oracle(problem, 2);
    CAPTURE(inst);
    CHECK(r.best_bits == opt.support);
    CHECK(r.best_bits.indices() == std::vector<std::size_t>{3 + static_cast<std::size_t>(inst), 15});
  }
}

TEST_CASE("AM-RR recovers the recipe corruption set") {
  const Dataset ds = gen_robust({.n = 600, .p = 100, .alpha = 0.3, .seed = 7});
  const RobustRegressionProblem problem(ds.x, ds.y, ds.budget());
  const auto r = run_amrr(problem, {});
  CHECK(r.best_bits.indices() == ds.true_support);
  double err = 0.0;
  for (std::size_t j = 0; j < 100; ++j) err += (r.weights[j] - ds.w_star[j]) * (r.weights[j] - ds.w_star[j]);
  CHECK(err <= 1e-18);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i].second <= r.history[i - 1].second);
}
