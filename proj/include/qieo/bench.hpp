#pragma once

// Metrics, multi-trial experiments, aggregation and table rendering.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qieo/datagen.hpp"
#include "qieo/problems.hpp"

namespace qieo {

struct Metrics {
  double mse = 0.0;  // the solver's own objective value
  std::size_t recovery_hits = 0;
  std::size_t recovery_total = 0;
  std::size_t extras = 0;
  std::size_t support_length = 0;
  double w_err_sq = 0.0;  // ||w_est - w*||^2
  std::size_t generations = 0;
  double wall_ms = 0.0;   // 0 unless timing was requested

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct RecoveryCount {
  std::size_t hits = 0;
  std::size_t total = 0;
  std::size_t extras = 0;

  friend bool operator==(const RecoveryCount&, const RecoveryCount&) = default;
};

/// hits = |estimated & truth|, total = |truth|, extras = |estimated \ truth|.
/// Index sets need not be sorted but must be duplicate-free. Throws
/// ContractViolation when truth is empty.
RecoveryCount recovery_rate(std::span<const std::size_t> estimated, std::span<const std::size_t> truth);

/// Metrics of `result` against the dataset it was solved on. Sparse results are
/// supports over features, robust results supports over rows; a length mismatch
/// throws ContractViolation. With an empty truth (alpha = 0) every selected
/// index counts as an extra.
Metrics evaluate(const SolverResult& result, const Dataset& ds);

// ---------------------------------------------------------------------------
// Solver registry: "qieo", "ga", "iht", "adam", "de", "amrr".

/// Names accepted in experiment documents, in registry order.
std::span<const std::string_view> solver_names();
bool solver_is_deterministic(std::string_view name);
bool solver_supports(std::string_view name, DatasetKind kind);

/// Parses and validates a solver config document, filling defaults. The result
/// is the effective config recorded with every trial. Throws ParseError on
/// unknown names or fields and ContractViolation on invalid values.
nlohmann::json effective_solver_config(std::string_view name, const nlohmann::json& config);

/// Runs one solver on a prepared problem. `problem` must have been built from
/// `ds` (see make_problem); `seed` is ignored by deterministic solvers.
SolverResult run_solver(std::string_view name, const nlohmann::json& effective_config,
                        std::uint64_t seed, const Dataset& ds, const FitnessOracle& problem);

/// SparseRecoveryProblem with s = |true_support| or RobustRegressionProblem with k = |true_support|.
std::unique_ptr<FitnessOracle> make_problem(const Dataset& ds);

// ---------------------------------------------------------------------------
// Experiments

enum class Aggregation { best, median };
std::string to_string(Aggregation a);
/// Throws ParseError for anything other than "best" or "median".
Aggregation parse_aggregation(std::string_view text);

struct DatasetEntry {
  std::string name;
  std::variant<SparseGenConfig, RobustGenConfig, std::filesystem::path> source;
};

struct SolverEntry {
  std::string name;
  nlohmann::json config = nlohmann::json::object();  // effective (defaults filled)
  std::optional<std::size_t> trials;                 // overrides the spec-level count
};

struct ExperimentSpec {
  std::string experiment_id;
  std::vector<DatasetEntry> datasets;
  std::vector<SolverEntry> solvers;
  std::size_t trials = 5;
  std::uint64_t base_seed = 0;
  Aggregation aggregation = Aggregation::best;
  bool record_wall_time = false;  // off by default so reruns are byte-identical

  /// Throws ContractViolation on empty lists, trials < 1, duplicate names,
  /// unsupported solver/dataset pairs or names containing , " or newlines.
  void validate() const;
  /// Trials actually run for `solver` (1 for deterministic solvers).
  std::size_t trials_for(const SolverEntry& solver) const;
};

/// Experiment document -> spec. Relative dataset paths resolve against
/// `base_dir`. A generator entry whose "alpha" is an array expands into one
/// dataset per value, named "<name>-alpha<value>", sharing X and w*.
ExperimentSpec experiment_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const ExperimentSpec& spec);
ExperimentSpec load_experiment(const std::filesystem::path& path);

/// Stable hash of (base_seed, solver name, trial index); independent of order.
std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view solver, std::size_t trial);

struct TrialRecord {
  std::string experiment_id;
  std::string dataset;
  std::string solver;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Metrics metrics;
  nlohmann::json config;
  std::vector<std::size_t> support;
  Vector weights;
  std::vector<std::string> notes;
  std::optional<std::string> error;  // set when the solver threw; metrics are then meaningless
};

struct RunOptions {
  std::size_t jobs = 1;
  /// Called once per finished trial, serialized, in completion order.
  std::function<void(const TrialRecord&)> on_record;
};

/// Runs every (dataset, solver, trial) of the spec. Solver failures are caught
/// and stored in TrialRecord::error so completed trials are kept. Records come
/// back in spec order (dataset, solver, trial) whatever `jobs` is. Dataset
/// generation or loading errors propagate.
std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

nlohmann::json to_json(const TrialRecord& r);
TrialRecord trial_record_from_json(const nlohmann::json& j);

struct ReportRow {
  std::string dataset;
  std::string solver;
  Metrics metrics;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ReportTable {
  std::string experiment_id;
  Aggregation aggregation = Aggregation::best;
  std::vector<ReportRow> rows;

  friend bool operator==(const ReportTable&, const ReportTable&) = default;
};

/// One row per (dataset, solver) in first-appearance order; failed records are
/// skipped. best: the minimal-mse record (ties to the lower trial index).
/// median: lower median of each real metric and of generations, with the
/// support counts taken from the lower-median-mse trial. Throws
/// ContractViolation on an empty list.
ReportTable aggregate(std::span<const TrialRecord> records, Aggregation mode);

enum class ReportFormat { csv, markdown, json };
ReportFormat parse_report_format(std::string_view text);

/// Column order of the CSV rendering.
std::span<const std::string_view> csv_columns();

std::string render(const ReportTable& table, ReportFormat format);
/// Inverse of render(table, csv); throws ParseError with the line number.
ReportTable parse_csv(std::string_view text);

/// Shortest decimal text that reads back to exactly `v`.
std::string format_real(double v);

}  // namespace qieo
