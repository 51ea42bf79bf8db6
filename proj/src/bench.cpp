#include "qieo/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <type_traits>

#include "qieo/baselines.hpp"
#include "qieo/error.hpp"
#include "qieo/json_io.hpp"
#include "qieo/parallel.hpp"
#include "qieo/qieo.hpp"

namespace qieo {

using nlohmann::json;
using json_field::optional;
using json_field::required;

// ---------------------------------------------------------------------------
// Metrics

RecoveryCount recovery_rate(std::span<const std::size_t> estimated, std::span<const std::size_t> truth) {
  if (truth.empty()) throw ContractViolation("recovery_rate: truth must be nonempty");
  const std::set<std::size_t> t(truth.begin(), truth.end());
  RecoveryCount out;
  out.total = t.size();
  for (std::size_t i : estimated) {
    if (t.contains(i)) {
      ++out.hits;
    } else {
      ++out.extras;
    }
  }
  return out;
}

Metrics evaluate(const SolverResult& result, const Dataset& ds) {
  const std::size_t expected = ds.kind == DatasetKind::sparse ? ds.p() : ds.n();
  if (result.best_bits.size() != expected) {
    throw ContractViolation("evaluate: support length " + std::to_string(result.best_bits.size()) +
                            " does not match a " + to_string(ds.kind) + " dataset (expected " +
                            std::to_string(expected) + ")");
  }
  if (result.weights.size() != ds.p()) {
    throw ContractViolation("evaluate: weight vector has " + std::to_string(result.weights.size()) +
                            " entries, dataset has p=" + std::to_string(ds.p()));
  }
  Metrics m;
  m.mse = result.best_fitness;
  const auto support = result.best_bits.indices();
  m.support_length = support.size();
  if (ds.true_support.empty()) {
    m.extras = support.size();
  } else {
    const RecoveryCount rc = recovery_rate(support, ds.true_support);
    m.recovery_hits = rc.hits;
    m.recovery_total = rc.total;
    m.extras = rc.extras;
  }
  for (std::size_t j = 0; j < ds.p(); ++j) {
    const double e = result.weights[j] - ds.w_star[j];
    m.w_err_sq += e * e;
  }
  m.generations = result.generations_run;
  return m;
}

// ---------------------------------------------------------------------------
// Solver registry

namespace {

constexpr std::string_view kSolverNames[] = {"qieo", "ga", "iht", "adam", "de", "amrr"};

void require_known(std::string_view name) {
  if (std::find(std::begin(kSolverNames), std::end(kSolverNames), name) == std::end(kSolverNames)) {
    throw ParseError("unknown solver '" + std::string(name) + "' (expected qieo, ga, iht, adam, de or amrr)");
  }
}

QieoConfig qieo_config(const json& j) {
  json_field::reject_unknown(j, {"population_size", "max_generations", "stall_window", "fitness_tolerance",
                                 "delta", "delta_pi", "phi_min", "phi_max", "eval_threads"},
                             "qieo config");
  if (j.contains("delta") && j.contains("delta_pi")) {
    throw ParseError("qieo config: give either 'delta' (radians) or 'delta_pi' (multiples of pi), not both");
  }
  QieoConfig c;
  c.population_size = optional<std::size_t>(j, "population_size", c.population_size);
  c.max_generations = optional<std::size_t>(j, "max_generations", c.max_generations);
  c.stall_window = optional<std::size_t>(j, "stall_window", c.stall_window);
  c.fitness_tolerance = optional<double>(j, "fitness_tolerance", c.fitness_tolerance);
  c.rotation.delta = optional<double>(j, "delta", c.rotation.delta);
  if (j.contains("delta_pi")) c.rotation.delta = required<double>(j, "delta_pi") * std::numbers::pi;
  c.rotation.phi_min = optional<double>(j, "phi_min", c.rotation.phi_min);
  c.rotation.phi_max = optional<double>(j, "phi_max", c.rotation.phi_max);
  c.eval_threads = optional<std::size_t>(j, "eval_threads", c.eval_threads);
  c.validate();
  return c;
}

json to_json(const QieoConfig& c) {
  return {{"population_size", c.population_size}, {"max_generations", c.max_generations},
          {"stall_window", c.stall_window},       {"fitness_tolerance", c.fitness_tolerance},
          {"delta", c.rotation.delta},            {"phi_min", c.rotation.phi_min},
          {"phi_max", c.rotation.phi_max},        {"eval_threads", c.eval_threads}};
}

GaConfig ga_config(const json& j) {
  json_field::reject_unknown(j, {"population_size", "generations", "crossover_rate", "mutation_rate",
                                 "tournament_size", "elitism_count", "fitness_tolerance", "eval_threads"},
                             "ga config");
  GaConfig c;
  c.population_size = optional<std::size_t>(j, "population_size", c.population_size);
  c.generations = optional<std::size_t>(j, "generations", c.generations);
  c.crossover_rate = optional<double>(j, "crossover_rate", c.crossover_rate);
  if (j.contains("mutation_rate") && !j.at("mutation_rate").is_null()) {
    c.mutation_rate = required<double>(j, "mutation_rate");
  }
  c.tournament_size = optional<std::size_t>(j, "tournament_size", c.tournament_size);
  c.elitism_count = optional<std::size_t>(j, "elitism_count", c.elitism_count);
  c.fitness_tolerance = optional<double>(j, "fitness_tolerance", c.fitness_tolerance);
  c.eval_threads = optional<std::size_t>(j, "eval_threads", c.eval_threads);
  c.validate();
  return c;
}

json to_json(const GaConfig& c) {
  return {{"population_size", c.population_size},
          {"generations", c.generations},
          {"crossover_rate", c.crossover_rate},
          {"mutation_rate", c.mutation_rate ? json(*c.mutation_rate) : json(nullptr)},
          {"tournament_size", c.tournament_size},
          {"elitism_count", c.elitism_count},
          {"fitness_tolerance", c.fitness_tolerance},
          {"eval_threads", c.eval_threads}};
}

IhtConfig iht_config(const json& j) {
  json_field::reject_unknown(j, {"max_iterations", "step_size", "convergence_tol"}, "iht config");
  IhtConfig c;
  c.max_iterations = optional<std::size_t>(j, "max_iterations", c.max_iterations);
  if (j.contains("step_size")) {
    const json& s = j.at("step_size");
    if (s.is_string()) {
      if (s.get<std::string>() != "auto") throw ParseError("iht config: step_size must be \"auto\" or a number");
    } else {
      c.step_size = required<double>(j, "step_size");
      if (!(*c.step_size > 0.0)) throw ContractViolation("IHT step_size must be positive");
    }
  }
  c.convergence_tol = optional<double>(j, "convergence_tol", c.convergence_tol);
  if (c.max_iterations < 1) throw ContractViolation("IHT max_iterations must be >= 1");
  return c;
}

json to_json(const IhtConfig& c) {
  return {{"max_iterations", c.max_iterations},
          {"step_size", c.step_size ? json(*c.step_size) : json("auto")},
          {"convergence_tol", c.convergence_tol}};
}

AdamConfig adam_config(const json& j) {
  json_field::reject_unknown(j, {"learning_rate", "beta1", "beta2", "epsilon", "iterations", "l1_weight",
                                 "support_threshold"},
                             "adam config");
  AdamConfig c;
  c.learning_rate = optional<double>(j, "learning_rate", c.learning_rate);
  c.beta1 = optional<double>(j, "beta1", c.beta1);
  c.beta2 = optional<double>(j, "beta2", c.beta2);
  c.epsilon = optional<double>(j, "epsilon", c.epsilon);
  c.iterations = optional<std::size_t>(j, "iterations", c.iterations);
  c.l1_weight = optional<double>(j, "l1_weight", c.l1_weight);
  c.support_threshold = optional<double>(j, "support_threshold", c.support_threshold);
  c.validate();
  return c;
}

json to_json(const AdamConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"beta1", c.beta1},
          {"beta2", c.beta2},                 {"epsilon", c.epsilon},
          {"iterations", c.iterations},       {"l1_weight", c.l1_weight},
          {"support_threshold", c.support_threshold}};
}

DeConfig de_config(const json& j) {
  json_field::reject_unknown(j, {"population_size", "generations", "differential_weight", "crossover_prob",
                                 "l1_weight", "support_threshold", "init_range"},
                             "de config");
  DeConfig c;
  c.population_size = optional<std::size_t>(j, "population_size", c.population_size);
  c.generations = optional<std::size_t>(j, "generations", c.generations);
  c.differential_weight = optional<double>(j, "differential_weight", c.differential_weight);
  c.crossover_prob = optional<double>(j, "crossover_prob", c.crossover_prob);
  c.l1_weight = optional<double>(j, "l1_weight", c.l1_weight);
  c.support_threshold = optional<double>(j, "support_threshold", c.support_threshold);
  c.init_range = optional<double>(j, "init_range", c.init_range);
  c.validate();
  return c;
}

json to_json(const DeConfig& c) {
  return {{"population_size", c.population_size},
          {"generations", c.generations},
          {"differential_weight", c.differential_weight},
          {"crossover_prob", c.crossover_prob},
          {"l1_weight", c.l1_weight},
          {"support_threshold", c.support_threshold},
          {"init_range", c.init_range}};
}

AmrrConfig amrr_config(const json& j) {
  json_field::reject_unknown(j, {"max_iterations"}, "amrr config");
  AmrrConfig c;
  c.max_iterations = optional<std::size_t>(j, "max_iterations", c.max_iterations);
  if (c.max_iterations < 1) throw ContractViolation("AM-RR max_iterations must be >= 1");
  return c;
}

json to_json(const AmrrConfig& c) { return {{"max_iterations", c.max_iterations}}; }

template <class P>
const P& as(const FitnessOracle& problem, std::string_view solver) {
  const auto* p = dynamic_cast<const P*>(&problem);
  if (!p) throw ContractViolation("solver '" + std::string(solver) + "' cannot run on this problem kind");
  return *p;
}

}  // namespace

std::span<const std::string_view> solver_names() { return kSolverNames; }

bool solver_is_deterministic(std::string_view name) {
  require_known(name);
  return name == "iht" || name == "adam" || name == "amrr";
}

bool solver_supports(std::string_view name, DatasetKind kind) {
  require_known(name);
  if (name == "iht" || name == "de") return kind == DatasetKind::sparse;
  if (name == "amrr") return kind == DatasetKind::robust;
  return true;
}

json effective_solver_config(std::string_view name, const json& config) {
  require_known(name);
  const json& j = config.is_null() ? json::object() : config;
  if (!j.is_object()) throw ParseError("solver '" + std::string(name) + "': config must be an object");
  if (name == "qieo") return to_json(qieo_config(j));
  if (name == "ga") return to_json(ga_config(j));
  if (name == "iht") return to_json(iht_config(j));
  if (name == "adam") return to_json(adam_config(j));
  if (name == "de") return to_json(de_config(j));
  return to_json(amrr_config(j));
}

SolverResult run_solver(std::string_view name, const json& config, std::uint64_t seed, const Dataset& ds,
                        const FitnessOracle& problem) {
  require_known(name);
  if (!solver_supports(name, ds.kind)) {
    throw ContractViolation("solver '" + std::string(name) + "' does not support " + to_string(ds.kind) +
                            " datasets");
  }
  if (name == "qieo") {
    QieoConfig c = qieo_config(config);
    c.seed = seed;
    return run_qieo(problem, c);
  }
  if (name == "ga") {
    GaConfig c = ga_config(config);
    c.seed = seed;
    return run_ga(problem, c);
  }
  if (name == "iht") return run_iht(as<SparseRecoveryProblem>(problem, name), iht_config(config));
  if (name == "adam") {
    const AdamConfig c = adam_config(config);
    if (ds.kind == DatasetKind::sparse) return run_adam(as<SparseRecoveryProblem>(problem, name), c);
    return run_adam(as<RobustRegressionProblem>(problem, name), c);
  }
  if (name == "de") {
    DeConfig c = de_config(config);
    c.seed = seed;
    return run_de(as<SparseRecoveryProblem>(problem, name), c);
  }
  return run_amrr(as<RobustRegressionProblem>(problem, name), amrr_config(config));
}

std::unique_ptr<FitnessOracle> make_problem(const Dataset& ds) {
  if (ds.kind == DatasetKind::sparse) {
    return std::make_unique<SparseRecoveryProblem>(ds.x, ds.y, ds.true_support.size());
  }
  return std::make_unique<RobustRegressionProblem>(ds.x, ds.y, ds.true_support.size());
}

// ---------------------------------------------------------------------------
// Experiment documents

std::string to_string(Aggregation a) { return a == Aggregation::best ? "best" : "median"; }

Aggregation parse_aggregation(std::string_view text) {
  if (text == "best") return Aggregation::best;
  if (text == "median") return Aggregation::median;
  throw ParseError("aggregation must be \"best\" or \"median\", got \"" + std::string(text) + "\"");
}

namespace {

void check_name(const std::string& name, const char* what) {
  if (name.empty()) throw ContractViolation(std::string(what) + " name must be nonempty");
  if (name.find_first_of(",\"\n\r") != std::string::npos) {
    throw ContractViolation(std::string(what) + " name '" + name + "' contains a comma, quote or newline");
  }
}

DatasetKind kind_of(const DatasetEntry& d) {
  if (std::holds_alternative<SparseGenConfig>(d.source)) return DatasetKind::sparse;
  if (std::holds_alternative<RobustGenConfig>(d.source)) return DatasetKind::robust;
  return DatasetKind::sparse;  // unknown until loaded; checked again at run time
}

}  // namespace

void ExperimentSpec::validate() const {
  check_name(experiment_id, "experiment");
  if (datasets.empty()) throw ContractViolation("experiment needs at least one dataset");
  if (solvers.empty()) throw ContractViolation("experiment needs at least one solver");
  if (trials < 1) throw ContractViolation("experiment trials must be >= 1");
  std::set<std::string> seen;
  for (const DatasetEntry& d : datasets) {
    check_name(d.name, "dataset");
    if (!seen.insert(d.name).second) throw ContractViolation("duplicate dataset name '" + d.name + "'");
    if (const auto* c = std::get_if<SparseGenConfig>(&d.source)) c->validate();
    if (const auto* c = std::get_if<RobustGenConfig>(&d.source)) c->validate();
  }
  seen.clear();
  for (const SolverEntry& s : solvers) {
    require_known(s.name);
    if (!seen.insert(s.name).second) throw ContractViolation("duplicate solver '" + s.name + "'");
    if (s.trials && *s.trials < 1) throw ContractViolation("solver '" + s.name + "': trials must be >= 1");
    for (const DatasetEntry& d : datasets) {
      if (std::holds_alternative<std::filesystem::path>(d.source)) continue;
      if (!solver_supports(s.name, kind_of(d))) {
        throw ContractViolation("solver '" + s.name + "' cannot run on " + to_string(kind_of(d)) +
                                " dataset '" + d.name + "'");
      }
    }
  }
}

std::size_t ExperimentSpec::trials_for(const SolverEntry& solver) const {
  if (solver_is_deterministic(solver.name)) return 1;
  return solver.trials.value_or(trials);
}

ExperimentSpec experiment_from_json(const json& doc, const std::filesystem::path& base_dir) {
  json_field::reject_unknown(doc, {"experiment_id", "datasets", "solvers", "trials", "base_seed", "aggregation",
                                   "record_wall_time"},
                             "experiment");
  ExperimentSpec spec;
  spec.experiment_id = required<std::string>(doc, "experiment_id");
  spec.trials = optional<std::size_t>(doc, "trials", spec.trials);
  spec.base_seed = optional<std::uint64_t>(doc, "base_seed", spec.base_seed);
  spec.aggregation = parse_aggregation(optional<std::string>(doc, "aggregation", "best"));
  spec.record_wall_time = optional<bool>(doc, "record_wall_time", false);

  const json datasets = required<json>(doc, "datasets");
  if (!datasets.is_array()) throw ParseError("field 'datasets': expected an array");
  for (const json& d : datasets) {
    json_field::reject_unknown(d, {"name", "generator", "path"}, "dataset entry");
    const std::string name = required<std::string>(d, "name");
    if (d.contains("generator") == d.contains("path")) {
      throw ParseError("dataset '" + name + "': give exactly one of 'generator' or 'path'");
    }
    if (d.contains("path")) {
      std::filesystem::path path = required<std::string>(d, "path");
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      spec.datasets.push_back({name, path});
      continue;
    }
    const json& g = d.at("generator");
    const std::string kind = required<std::string>(g, "kind");
    try {
      if (kind == "sparse") {
        spec.datasets.push_back({name, sparse_gen_from_json(g)});
      } else if (kind == "robust") {
        if (g.contains("alpha") && g.at("alpha").is_array()) {
          for (const json& a : g.at("alpha")) {
            json single = g;
            single["alpha"] = a;
            const RobustGenConfig c = robust_gen_from_json(single);
            spec.datasets.push_back({name + "-alpha" + format_real(c.alpha), c});
          }
        } else {
          spec.datasets.push_back({name, robust_gen_from_json(g)});
        }
      } else {
        throw ParseError("generator kind must be \"sparse\" or \"robust\", got \"" + kind + "\"");
      }
    } catch (const ParseError& e) {
      throw ParseError("dataset '" + name + "': " + e.what());
    }
  }

  const json solvers = required<json>(doc, "solvers");
  if (!solvers.is_array()) throw ParseError("field 'solvers': expected an array");
  for (const json& s : solvers) {
    json_field::reject_unknown(s, {"name", "config", "trials"}, "solver entry");
    SolverEntry entry;
    entry.name = required<std::string>(s, "name");
    require_known(entry.name);
    if (s.contains("trials")) entry.trials = required<std::size_t>(s, "trials");
    try {
      entry.config = effective_solver_config(entry.name, s.value("config", json::object()));
    } catch (const ParseError& e) {
      throw ParseError("solver '" + entry.name + "': " + e.what());
    }
    spec.solvers.push_back(std::move(entry));
  }
  spec.validate();
  return spec;
}

json to_json(const ExperimentSpec& spec) {
  json datasets = json::array();
  for (const DatasetEntry& d : spec.datasets) {
    json e = {{"name", d.name}};
    std::visit(
        [&](const auto& src) {
          using T = std::decay_t<decltype(src)>;
          if constexpr (std::is_same_v<T, std::filesystem::path>) {
            e["path"] = src.string();
          } else {
            e["generator"] = to_json(src);
          }
        },
        d.source);
    datasets.push_back(std::move(e));
  }
  json solvers = json::array();
  for (const SolverEntry& s : spec.solvers) {
    json e = {{"name", s.name}, {"config", s.config}};
    if (s.trials) e["trials"] = *s.trials;
    solvers.push_back(std::move(e));
  }
  return {{"experiment_id", spec.experiment_id}, {"datasets", datasets},
          {"solvers", solvers},                  {"trials", spec.trials},
          {"base_seed", spec.base_seed},         {"aggregation", to_string(spec.aggregation)},
          {"record_wall_time", spec.record_wall_time}};
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open experiment " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return experiment_from_json(doc, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view solver, std::size_t trial) {
  return derive_seed(derive_seed(base_seed, hash_name(solver)), trial);
}

// ---------------------------------------------------------------------------
// Running

namespace {

struct PreparedDataset {
  std::string name;
  Dataset data;
  std::unique_ptr<FitnessOracle> problem;
};

struct Task {
  std::size_t dataset;
  std::size_t solver;
  std::size_t trial;
};

}  // namespace

std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  std::vector<PreparedDataset> prepared;
  for (const DatasetEntry& d : spec.datasets) {
    PreparedDataset p;
    p.name = d.name;
    p.data = std::visit(
        [](const auto& src) -> Dataset {
          using T = std::decay_t<decltype(src)>;
          if constexpr (std::is_same_v<T, SparseGenConfig>) {
            return gen_sparse(src);
          } else if constexpr (std::is_same_v<T, RobustGenConfig>) {
            return gen_robust(src);
          } else {
            return load_dataset(src);
          }
        },
        d.source);
    for (const SolverEntry& s : spec.solvers) {
      if (!solver_supports(s.name, p.data.kind)) {
        throw ContractViolation("solver '" + s.name + "' cannot run on " + to_string(p.data.kind) +
                                " dataset '" + d.name + "'");
      }
    }
    p.problem = make_problem(p.data);
    prepared.push_back(std::move(p));
  }

  std::vector<Task> tasks;
  for (std::size_t d = 0; d < prepared.size(); ++d) {
    for (std::size_t s = 0; s < spec.solvers.size(); ++s) {
      for (std::size_t t = 0; t < spec.trials_for(spec.solvers[s]); ++t) tasks.push_back({d, s, t});
    }
  }

  std::vector<TrialRecord> records(tasks.size());
  std::mutex callback_mutex;
  parallel_for(tasks.size(), std::max<std::size_t>(1, options.jobs), [&](std::size_t idx) {
    const Task& task = tasks[idx];
    const PreparedDataset& ds = prepared[task.dataset];
    const SolverEntry& solver = spec.solvers[task.solver];
    TrialRecord& rec = records[idx];
    rec.experiment_id = spec.experiment_id;
    rec.dataset = ds.name;
    rec.solver = solver.name;
    rec.trial = task.trial;
    rec.seed = trial_seed(spec.base_seed, solver.name, task.trial);
    rec.config = solver.config;
    try {
      const SolverResult result = run_solver(solver.name, solver.config, rec.seed, ds.data, *ds.problem);
      rec.metrics = evaluate(result, ds.data);
      if (spec.record_wall_time) {
        rec.metrics.wall_ms = std::chrono::duration<double, std::milli>(result.wall_time).count();
      }
      rec.support = result.best_bits.indices();
      rec.weights = result.weights;
      rec.notes = result.notes;
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
    if (options.on_record) {
      std::lock_guard lock(callback_mutex);
      options.on_record(rec);
    }
  });
  return records;
}

json to_json(const TrialRecord& r) {
  const Metrics& m = r.metrics;
  json j = {{"experiment_id", r.experiment_id},
            {"dataset", r.dataset},
            {"solver", r.solver},
            {"trial", r.trial},
            {"seed", r.seed},
            {"metrics",
             {{"mse", m.mse},
              {"recovery_hits", m.recovery_hits},
              {"recovery_total", m.recovery_total},
              {"extras", m.extras},
              {"support_length", m.support_length},
              {"w_err_sq", m.w_err_sq},
              {"generations", m.generations},
              {"wall_ms", m.wall_ms}}},
            {"config", r.config},
            {"support", r.support},
            {"weights", r.weights},
            {"notes", r.notes}};
  if (r.error) j["error"] = *r.error;
  return j;
}

TrialRecord trial_record_from_json(const json& j) {
  json_field::reject_unknown(j, {"experiment_id", "dataset", "solver", "trial", "seed", "metrics", "config",
                                 "support", "weights", "notes", "error"},
                             "trial record");
  TrialRecord r;
  r.experiment_id = required<std::string>(j, "experiment_id");
  r.dataset = required<std::string>(j, "dataset");
  r.solver = required<std::string>(j, "solver");
  r.trial = required<std::size_t>(j, "trial");
  r.seed = required<std::uint64_t>(j, "seed");
  const json m = required<json>(j, "metrics");
  json_field::reject_unknown(m, {"mse", "recovery_hits", "recovery_total", "extras", "support_length", "w_err_sq",
                                 "generations", "wall_ms"},
                             "metrics");
  r.metrics.mse = required<double>(m, "mse");
  r.metrics.recovery_hits = required<std::size_t>(m, "recovery_hits");
  r.metrics.recovery_total = required<std::size_t>(m, "recovery_total");
  r.metrics.extras = required<std::size_t>(m, "extras");
  r.metrics.support_length = required<std::size_t>(m, "support_length");
  r.metrics.w_err_sq = required<double>(m, "w_err_sq");
  r.metrics.generations = required<std::size_t>(m, "generations");
  r.metrics.wall_ms = required<double>(m, "wall_ms");
  r.config = optional<json>(j, "config", json::object());
  r.support = optional<std::vector<std::size_t>>(j, "support", {});
  r.weights = optional<Vector>(j, "weights", {});
  r.notes = optional<std::vector<std::string>>(j, "notes", {});
  if (j.contains("error")) r.error = required<std::string>(j, "error");
  return r;
}

// ---------------------------------------------------------------------------
// Aggregation and rendering

ReportTable aggregate(std::span<const TrialRecord> records, Aggregation mode) {
  if (records.empty()) throw ContractViolation("aggregate: no records");
  ReportTable table;
  table.experiment_id = records.front().experiment_id;
  table.aggregation = mode;

  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<const TrialRecord*>> groups;
  for (const TrialRecord& r : records) {
    if (r.error) continue;
    auto key = std::make_pair(r.dataset, r.solver);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) keys.push_back(key);
    it->second.push_back(&r);
  }
  for (const auto& key : keys) {
    std::vector<const TrialRecord*> g = groups.at(key);
    std::sort(g.begin(), g.end(), [](const TrialRecord* a, const TrialRecord* b) {
      return a->metrics.mse != b->metrics.mse ? a->metrics.mse < b->metrics.mse : a->trial < b->trial;
    });
    ReportRow row{key.first, key.second, {}};
    if (mode == Aggregation::best) {
      row.metrics = g.front()->metrics;
    } else {
      const std::size_t mid = (g.size() - 1) / 2;
      row.metrics = g[mid]->metrics;
      auto lower_median = [&](auto field) {
        std::vector<decltype(field(g[0]->metrics))> v;
        for (const TrialRecord* r : g) v.push_back(field(r->metrics));
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
        return v[mid];
      };
      row.metrics.w_err_sq = lower_median([](const Metrics& m) { return m.w_err_sq; });
      row.metrics.generations = lower_median([](const Metrics& m) { return m.generations; });
      row.metrics.wall_ms = lower_median([](const Metrics& m) { return m.wall_ms; });
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "markdown" || text == "md") return ReportFormat::markdown;
  if (text == "json") return ReportFormat::json;
  throw ParseError("report format must be csv, markdown or json, got \"" + std::string(text) + "\"");
}

namespace {

constexpr std::string_view kCsvColumns[] = {"experiment_id", "dataset", "solver", "aggregation", "mse",
                                            "recovery_hits", "recovery_total", "extras", "support_length",
                                            "w_err_sq", "generations", "wall_ms"};

std::string csv_header() {
  std::string out;
  for (std::string_view c : kCsvColumns) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string scientific(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string markdown(const ReportTable& table) {
  std::ostringstream out;
  out << "# " << table.experiment_id << "\n\nAggregation: " << to_string(table.aggregation) << " trial\n";
  std::vector<std::string> datasets;
  for (const ReportRow& r : table.rows) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
  }
  for (const std::string& d : datasets) {
    out << "\n## " << d << "\n\n"
        << "| Solver | MSE | Recovery Rate | Support Length | Squared l2 Error | Generations |\n"
        << "|---|---|---|---|---|---|\n";
    for (const ReportRow& r : table.rows) {
      if (r.dataset != d) continue;
      const Metrics& m = r.metrics;
      out << "| " << r.solver << " | " << scientific(m.mse) << " | " << m.recovery_hits << '/' << m.recovery_total;
      if (m.extras > 0) out << " (+" << m.extras << " extras)";
      out << " | " << m.support_length << " | " << scientific(m.w_err_sq) << " | " << m.generations << " |\n";
    }
  }
  return out.str();
}

template <class T>
T parse_number(std::string_view field, std::size_t line, std::string_view column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("csv line " + std::to_string(line) + ": column " + std::string(column) + ": cannot parse '" +
                     std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::span<const std::string_view> csv_columns() { return kCsvColumns; }

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string render(const ReportTable& table, ReportFormat format) {
  if (format == ReportFormat::markdown) return markdown(table);
  if (format == ReportFormat::json) {
    json rows = json::array();
    for (const ReportRow& r : table.rows) {
      const Metrics& m = r.metrics;
      rows.push_back({{"dataset", r.dataset},
                      {"solver", r.solver},
                      {"mse", m.mse},
                      {"recovery_hits", m.recovery_hits},
                      {"recovery_total", m.recovery_total},
                      {"extras", m.extras},
                      {"support_length", m.support_length},
                      {"w_err_sq", m.w_err_sq},
                      {"generations", m.generations},
                      {"wall_ms", m.wall_ms}});
    }
    json doc = {{"experiment_id", table.experiment_id},
                {"aggregation", to_string(table.aggregation)},
                {"rows", rows}};
    return doc.dump(1) + "\n";
  }
  std::string out = csv_header() + "\n";
  for (const ReportRow& r : table.rows) {
    const Metrics& m = r.metrics;
    out += table.experiment_id + ',' + r.dataset + ',' + r.solver + ',' + to_string(table.aggregation) + ',' +
           format_real(m.mse) + ',' + std::to_string(m.recovery_hits) + ',' + std::to_string(m.recovery_total) +
           ',' + std::to_string(m.extras) + ',' + std::to_string(m.support_length) + ',' +
           format_real(m.w_err_sq) + ',' + std::to_string(m.generations) + ',' + format_real(m.wall_ms) + '\n';
  }
  return out;
}

ReportTable parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != csv_header()) {
    throw ParseError("csv line 1: header must be exactly " + csv_header());
  }
  ReportTable table;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    std::vector<std::string_view> f;
    std::string_view rest = lines[ln];
    while (true) {
      const std::size_t c = rest.find(',');
      f.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest.remove_prefix(c + 1);
    }
    const std::size_t line_no = ln + 1;
    if (f.size() != std::size(kCsvColumns)) {
      throw ParseError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(std::size(kCsvColumns)) +
                       " fields, found " + std::to_string(f.size()));
    }
    const Aggregation agg = parse_aggregation(f[3]);
    if (ln == 1) {
      table.experiment_id = std::string(f[0]);
      table.aggregation = agg;
    } else if (f[0] != table.experiment_id || agg != table.aggregation) {
      throw ParseError("csv line " + std::to_string(line_no) + ": experiment_id and aggregation must match line 2");
    }
    ReportRow row;
    row.dataset = std::string(f[1]);
    row.solver = std::string(f[2]);
    Metrics& m = row.metrics;
    m.mse = parse_number<double>(f[4], line_no, kCsvColumns[4]);
    m.recovery_hits = parse_number<std::size_t>(f[5], line_no, kCsvColumns[5]);
    m.recovery_total = parse_number<std::size_t>(f[6], line_no, kCsvColumns[6]);
    m.extras = parse_number<std::size_t>(f[7], line_no, kCsvColumns[7]);
    m.support_length = parse_number<std::size_t>(f[8], line_no, kCsvColumns[8]);
    m.w_err_sq = parse_number<double>(f[9], line_no, kCsvColumns[9]);
    m.generations = parse_number<std::size_t>(f[10], line_no, kCsvColumns[10]);
    m.wall_ms = parse_number<double>(f[11], line_no, kCsvColumns[11]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace qieo
