#include "qieo/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>

#include "qieo/baselines.hpp"
#include "qieo/bench.hpp"
#include "qieo/datagen.hpp"
#include "qieo/error.hpp"
#include "qieo/numerics.hpp"
#include "qieo/qieo.hpp"

namespace qieo {

namespace {

constexpr std::string_view kSuites[] = {"amplitude_normalization", "measurement_statistics", "repair_symmetry",
                                        "residual_orthogonality",  "monotone_history",       "determinism"};

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

Outcome amplitude_normalization(bool fault) {
  Rng rng(11);
  RotationPolicy policy;
  std::vector<QubitRegister> regs = init_population(8, 64);
  double worst = 0.0;
  bool clamped = true;
  for (int round = 0; round < 300; ++round) {
    for (QubitRegister& r : regs) {
      CandidateSupport observed(r.size()), best(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) {
        observed.set(i, rng.uniform() < 0.5);
        best.set(i, rng.uniform() < 0.5);
      }
      r = rotate(r, observed, best, policy);
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double a = r.alpha(i);
        const double b = fault ? r.beta(i) * 1.001 : r.beta(i);
        worst = std::max(worst, std::abs(a * a + b * b - 1.0));
        clamped = clamped && r.angle(i) >= policy.phi_min && r.angle(i) <= policy.phi_max;
      }
    }
  }
  // cos^2 + sin^2 of the same angle: a few ulps of rounding at most.
  const double tol = 4 * std::numeric_limits<double>::epsilon();
  if (!clamped) return {false, "an angle left [phi_min, phi_max]"};
  return {worst <= tol, fmt("max |alpha^2 + beta^2 - 1| = %.3g (tolerance %.3g)", worst, tol)};
}

Outcome measurement_statistics(bool fault) {
  const double phi = std::numbers::pi / 4 + (fault ? 0.05 : 0.0);
  const QubitRegister reg(1, phi);
  Rng rng(2024);
  const int draws = 10000;
  int ones = 0;
  for (int t = 0; t < draws; ++t) ones += measure(reg, rng).test(0) ? 1 : 0;
  const double freq = static_cast<double>(ones) / draws;
  return {freq >= 0.48 && freq <= 0.52, fmt("P(1) at phi = pi/4 over 10000 draws = %.4f (band [0.48, 0.52])", freq)};
}

Outcome repair_symmetry(bool fault) {
  Rng rng(99);
  const int reps = 10000;
  std::vector<int> survived(4, 0), added(2, 0);
  for (int t = 0; t < reps; ++t) {
    CandidateSupport drop = CandidateSupport::from_string("111100");
    if (fault) {
      drop.set(0, false);
      drop.set(1, false);
    } else {
      repair(drop, 2, rng);
    }
    for (std::size_t i = 0; i < 4; ++i) survived[i] += drop.test(i) ? 1 : 0;
    CandidateSupport grow = CandidateSupport::from_string("111100");
    repair(grow, 5, rng);
    for (std::size_t i = 4; i < 6; ++i) added[i - 4] += grow.test(i) ? 1 : 0;
  }
  double worst = 0.0;
  for (int s : survived) worst = std::max(worst, std::abs(static_cast<double>(s) / reps - 0.5));
  for (int a : added) worst = std::max(worst, std::abs(static_cast<double>(a) / reps - 0.5));
  return {worst <= 0.02, fmt("max |frequency - 1/2| over kept and added positions = %.4f (tolerance 0.02)", worst)};
}

Outcome residual_orthogonality(bool fault) {
  Rng rng(5);
  double worst = 0.0;
  auto check = [&](const DenseMatrix& x, std::span<const double> y, const Vector& w,
                   std::span<const std::size_t> rows) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double g = 0.0;
      for (std::size_t i : rows) {
        double pred = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) pred += x(i, c) * w[c];
        g += x(i, j) * (y[i] - pred);
      }
      worst = std::max(worst, std::abs(g));
    }
  };
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = 30 + static_cast<std::size_t>(inst), p = 8;
    DenseMatrix x(n, p);
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) x(i, j) = rng.normal();
      y[i] = rng.normal();
    }
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;

    LeastSquaresSolution ls = least_squares(x, y);
    if (fault) ls.coeffs[0] += 1e-3;
    check(x, y, ls.coeffs, all);

    // Clean-row fits through the Gram system, with and without an anchor.
    const GramSystem gram(x, y);
    const std::vector<std::size_t> excluded = {1, 4, 9};
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(excluded.begin(), excluded.end(), i) == excluded.end()) kept.push_back(i);
    }
    check(x, y, gram.solve_excluding(excluded).coeffs, kept);
    const std::vector<std::size_t> reference = {1, 4, 10};
    auto anchor = gram.make_anchor(reference);
    check(x, y, gram.solve_excluding(excluded, anchor.get()).coeffs, kept);
  }
  return {worst <= 1e-8, fmt("max |X^T r| = %.3g (tolerance 1e-8)", worst)};
}

bool non_increasing(const SolverResult& r) {
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    if (r.history[i].second > r.history[i - 1].second) return false;
  }
  return !r.history.empty();
}

Outcome monotone_history(bool fault) {
  const Dataset sparse = gen_sparse({.n = 16, .p = 50, .s = 5, .noise_sigma = 0.0, .seed = 3});
  const Dataset robust = gen_robust({.n = 80, .p = 5, .alpha = 0.2, .outlier_scale = 5.0, .seed = 3});
  const SparseRecoveryProblem sp(sparse.x, sparse.y, 5);
  const RobustRegressionProblem rp(robust.x, robust.y, robust.true_support.size());

  std::vector<std::pair<std::string, SolverResult>> runs;
  QieoConfig qc;
  qc.population_size = 20;
  qc.max_generations = 80;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    qc.seed = seed;
    runs.emplace_back("qieo sparse", run_qieo(sp, qc));
    runs.emplace_back("qieo robust", run_qieo(rp, qc));
  }
  GaConfig gc;
  gc.population_size = 20;
  gc.generations = 80;
  runs.emplace_back("ga sparse", run_ga(sp, gc));
  runs.emplace_back("ga robust", run_ga(rp, gc));
  DeConfig dc;
  dc.population_size = 12;
  dc.generations = 80;
  runs.emplace_back("de sparse", run_de(sp, dc));
  runs.emplace_back("amrr robust", run_amrr(rp, {}));
  if (fault) runs.front().second.history.emplace_back(999, runs.front().second.best_fitness + 1.0);

  for (const auto& [name, r] : runs) {
    if (!non_increasing(r)) return {false, "best-fitness history of " + name + " increases"};
  }
  return {true, std::to_string(runs.size()) + " archived runs have non-increasing best-fitness histories"};
}

Outcome determinism(bool fault, std::size_t jobs) {
  const nlohmann::json doc = R"({
    "experiment_id": "selftest-determinism",
    "trials": 3,
    "base_seed": 17,
    "datasets": [
      {"name": "sparse-tiny", "generator": {"kind": "sparse", "n": 12, "p": 10, "s": 2, "seed": 4}},
      {"name": "robust-tiny", "generator": {"kind": "robust", "n": 60, "p": 4, "alpha": [0.1, 0.2], "seed": 4}}
    ],
    "solvers": [
      {"name": "qieo", "config": {"population_size": 16, "max_generations": 40}},
      {"name": "ga", "config": {"population_size": 16, "generations": 40}},
      {"name": "adam", "config": {"iterations": 400}}
    ]
  })"_json;
  const ExperimentSpec spec = experiment_from_json(doc);
  ExperimentSpec other = spec;
  if (fault) other.base_seed += 1;

  auto snapshot = [](const ExperimentSpec& s, std::size_t j) {
    RunOptions opt;
    opt.jobs = j;
    const auto records = run_experiment(s, opt);
    nlohmann::json dump = nlohmann::json::array();
    for (const TrialRecord& r : records) dump.push_back(to_json(r));
    return render(aggregate(records, s.aggregation), ReportFormat::csv) + dump.dump();
  };
  const std::string serial = snapshot(spec, 1);
  const std::string parallel = snapshot(other, jobs);
  if (serial != parallel) {
    return {false, "outputs at --jobs 1 and --jobs " + std::to_string(jobs) + " differ"};
  }
  return {true, "records and CSV byte-identical at --jobs 1 and --jobs " + std::to_string(jobs) + " (" +
                    std::to_string(serial.size()) + " bytes)"};
}

}  // namespace

std::span<const std::string_view> selftest_suites() { return kSuites; }

std::vector<SuiteResult> run_selftest(const SelftestOptions& options) {
  if (options.inject_fault &&
      std::find(std::begin(kSuites), std::end(kSuites), *options.inject_fault) == std::end(kSuites)) {
    throw ContractViolation("inject_fault: no suite named '" + *options.inject_fault + "'");
  }
  auto faulty = [&](std::string_view name) { return options.inject_fault && *options.inject_fault == name; };
  const std::vector<std::pair<std::string_view, std::function<Outcome(bool)>>> suites = {
      {kSuites[0], amplitude_normalization},
      {kSuites[1], measurement_statistics},
      {kSuites[2], repair_symmetry},
      {kSuites[3], residual_orthogonality},
      {kSuites[4], monotone_history},
      {kSuites[5], [&](bool f) { return determinism(f, options.parallel_jobs); }},
  };
  std::vector<SuiteResult> out;
  for (const auto& [name, fn] : suites) {
    const auto started = std::chrono::steady_clock::now();
    SuiteResult r;
    r.name = std::string(name);
    try {
      const Outcome o = fn(faulty(name));
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("threw: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace qieo
