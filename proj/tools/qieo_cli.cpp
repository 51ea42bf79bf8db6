// qieo: generate datasets, run experiments, render reports, enumerate exact
// optima and run the invariant suites.
//
// Exit codes: 0 ok, 2 bad configuration or input, 3 solver or runtime failure
// (including a failed selftest suite), 4 oracle guard refusal.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qieo/bench.hpp"
#include "qieo/datagen.hpp"
#include "qieo/error.hpp"
#include "qieo/json_io.hpp"
#include "qieo/problems.hpp"
#include "qieo/selftest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitGuard = 4;

constexpr const char* kOutDirEnv = "QIEO_OUT_DIR";

std::optional<fs::path> env_out_dir() {
  const char* v = std::getenv(kOutDirEnv);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return fs::path(v);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qieo::ParseError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// --- gen -------------------------------------------------------------------

struct GenArgs {
  std::string config_path;
  std::string kind;
  std::size_t n = 0, p = 0, s = 0;
  double alpha = -1.0;
  double noise_sigma = 0.0;
  double outlier_scale = 5.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  json cfg;
  if (!a.config_path.empty()) {
    try {
      cfg = json::parse(read_text(a.config_path));
    } catch (const json::parse_error& e) {
      throw qieo::ParseError(a.config_path + ": " + e.what());
    }
  } else {
    if (a.kind.empty()) throw qieo::ParseError("gen: give --config or --kind");
    cfg = {{"kind", a.kind}, {"n", a.n}, {"p", a.p}, {"seed", a.seed}};
    if (a.kind == "sparse") {
      cfg["s"] = a.s;
      cfg["noise_sigma"] = a.noise_sigma;
    } else if (a.kind == "robust") {
      if (a.alpha < 0.0) throw qieo::ParseError("gen: --alpha is required for robust datasets");
      cfg["alpha"] = a.alpha;
      cfg["outlier_scale"] = a.outlier_scale;
    }
  }
  const std::string kind = qieo::json_field::required<std::string>(cfg, "kind");
  std::vector<std::string> warnings;
  qieo::Dataset ds;
  if (kind == "sparse") {
    const qieo::SparseGenConfig c = qieo::sparse_gen_from_json(cfg);
    warnings = c.warnings();
    ds = qieo::gen_sparse(c);
  } else if (kind == "robust") {
    ds = qieo::gen_robust(qieo::robust_gen_from_json(cfg));
  } else {
    throw qieo::ParseError("gen: kind must be sparse or robust, got '" + kind + "'");
  }

  fs::path out = a.out;
  if (out.empty()) {
    const auto dir = env_out_dir();
    if (!dir) throw qieo::ParseError(std::string("gen: --out is required (or set ") + kOutDirEnv + ")");
    out = *dir / (kind + "-n" + std::to_string(ds.n()) + "-p" + std::to_string(ds.p()) + "-k" +
                  std::to_string(ds.budget()) + "-seed" + std::to_string(ds.seed()) + ".json");
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  qieo::save_dataset(ds, out);
  std::printf("wrote %s\nkind %s  n %zu  p %zu  %s %zu  seed %llu\n", out.string().c_str(), kind.c_str(), ds.n(),
              ds.p(), kind == "sparse" ? "s" : "k", ds.budget(), static_cast<unsigned long long>(ds.seed()));
  for (const std::string& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return kExitOk;
}

// --- run -------------------------------------------------------------------

struct RunArgs {
  std::string spec;
  std::string out;
  std::size_t jobs = 1;
  bool timing = false;
  bool quiet = false;
};

int cmd_run(const RunArgs& a) {
  qieo::ExperimentSpec spec = qieo::load_experiment(a.spec);
  if (a.timing) spec.record_wall_time = true;
  fs::path base = !a.out.empty() ? fs::path(a.out) : env_out_dir().value_or(fs::path("qieo-results"));
  const fs::path dir = base / spec.experiment_id;
  fs::create_directories(dir);
  const json effective = qieo::to_json(spec);
  write_text(dir / "spec.json", effective.dump(1) + "\n");

  qieo::RunOptions opt;
  opt.jobs = a.jobs;
  if (!a.quiet) {
    opt.on_record = [](const qieo::TrialRecord& r) {
      if (r.error) {
        std::fprintf(stderr, "[%s] %s trial %zu FAILED: %s\n", r.dataset.c_str(), r.solver.c_str(), r.trial,
                     r.error->c_str());
      } else {
        std::fprintf(stderr, "[%s] %s trial %zu: recovery %zu/%zu (+%zu) mse %.3e\n", r.dataset.c_str(),
                     r.solver.c_str(), r.trial, r.metrics.recovery_hits, r.metrics.recovery_total, r.metrics.extras,
                     r.metrics.mse);
      }
    };
  }
  const std::vector<qieo::TrialRecord> records = qieo::run_experiment(spec, opt);

  json dump = json::array();
  for (const qieo::TrialRecord& r : records) dump.push_back(qieo::to_json(r));
  write_text(dir / "records.json", json{{"spec", effective}, {"records", dump}}.dump(1) + "\n");

  int failed = 0;
  for (const qieo::TrialRecord& r : records) {
    if (!r.error) continue;
    ++failed;
    std::fprintf(stderr, "error: %s / %s / trial %zu (seed %llu): %s\n", r.dataset.c_str(), r.solver.c_str(),
                 r.trial, static_cast<unsigned long long>(r.seed), r.error->c_str());
  }
  if (failed == static_cast<int>(records.size())) {
    std::fprintf(stderr, "every trial failed; records kept in %s\n", dir.string().c_str());
    return kExitSolver;
  }
  const qieo::ReportTable table = qieo::aggregate(records, spec.aggregation);
  write_text(dir / "summary.csv", qieo::render(table, qieo::ReportFormat::csv));
  write_text(dir / "report.md", qieo::render(table, qieo::ReportFormat::markdown));
  std::printf("%s", qieo::render(table, qieo::ReportFormat::markdown).c_str());
  std::printf("\nresults in %s\n", dir.string().c_str());
  return failed > 0 ? kExitSolver : kExitOk;
}

// --- report ----------------------------------------------------------------

struct ReportArgs {
  std::string input;
  std::string format = "markdown";
  std::string aggregation;
};

int cmd_report(const ReportArgs& a) {
  fs::path in = a.input;
  if (fs::is_directory(in)) in /= "records.json";
  const qieo::ReportFormat format = qieo::parse_report_format(a.format);
  qieo::ReportTable table;
  if (in.extension() == ".csv") {
    table = qieo::parse_csv(read_text(in));
    if (!a.aggregation.empty() && qieo::parse_aggregation(a.aggregation) != table.aggregation) {
      throw qieo::ParseError("report: a CSV summary is already aggregated; re-aggregate from records.json");
    }
  } else {
    json doc;
    try {
      doc = json::parse(read_text(in));
    } catch (const json::parse_error& e) {
      throw qieo::ParseError(in.string() + ": " + e.what());
    }
    const json& list = doc.is_object() ? doc.at("records") : doc;
    std::vector<qieo::TrialRecord> records;
    for (const json& r : list) records.push_back(qieo::trial_record_from_json(r));
    qieo::Aggregation mode = qieo::Aggregation::best;
    if (doc.is_object() && doc.contains("spec")) {
      mode = qieo::parse_aggregation(doc["spec"].value("aggregation", "best"));
    }
    if (!a.aggregation.empty()) mode = qieo::parse_aggregation(a.aggregation);
    table = qieo::aggregate(records, mode);
  }
  std::printf("%s", qieo::render(table, format).c_str());
  return kExitOk;
}

// --- oracle ----------------------------------------------------------------

struct OracleArgs {
  std::string dataset;
  long long budget = -1;
};

int cmd_oracle(const OracleArgs& a) {
  const qieo::Dataset ds = qieo::load_dataset(a.dataset);
  const auto problem = qieo::make_problem(ds);
  const std::size_t budget = a.budget >= 0 ? static_cast<std::size_t>(a.budget) : ds.budget();
  const qieo::OracleOptimum best = qieo::brute_force_oracle(*problem, budget);
  const qieo::FitnessOutcome decoded = problem->decode(best.support);
  std::printf("dataset %s (%s, n %zu, p %zu)\nbudget %zu, %zu supports enumerated\n", a.dataset.c_str(),
              qieo::to_string(ds.kind).c_str(), ds.n(), ds.p(), budget, best.evaluated);
  std::printf("optimal support:");
  for (std::size_t i : best.support.indices()) std::printf(" %zu", i);
  std::printf("\nfitness %.17g\n", best.fitness);
  if (!ds.true_support.empty()) {
    const qieo::RecoveryCount rc = qieo::recovery_rate(best.support.indices(), ds.true_support);
    std::printf("planted support recovered %zu/%zu (+%zu extras)\n", rc.hits, rc.total, rc.extras);
  }
  std::printf("weights:");
  for (double w : decoded.weights) std::printf(" %.6g", w);
  std::printf("\n");
  return kExitOk;
}

// --- selftest --------------------------------------------------------------

int cmd_selftest(std::size_t jobs, const std::string& fault) {
  qieo::SelftestOptions opt;
  opt.parallel_jobs = jobs;
  if (!fault.empty()) opt.inject_fault = fault;
  const auto results = qieo::run_selftest(opt);
  bool ok = true;
  for (const qieo::SuiteResult& r : results) {
    std::printf("%s %-24s %6.2fs  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
    ok = ok && r.passed;
  }
  if (!ok) {
    for (const qieo::SuiteResult& r : results) {
      if (!r.passed) std::fprintf(stderr, "selftest suite failed: %s\n", r.name.c_str());
    }
  }
  return ok ? kExitOk : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-inspired evolutionary optimization for l0-constrained regression"};
  app.require_subcommand(1);
  app.footer(std::string("Environment: ") + kOutDirEnv +
             " sets the default output directory for `run` (and for `gen` without --out).\n"
             "Exit codes: 0 ok, 2 configuration error, 3 solver error, 4 oracle guard refusal.");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic dataset file");
  g->add_option("--config", gen.config_path, "Generator config document (JSON)")->check(CLI::ExistingFile);
  g->add_option("--kind", gen.kind, "sparse or robust")->check(CLI::IsMember({"sparse", "robust"}));
  g->add_option("--n", gen.n, "Rows");
  g->add_option("--p", gen.p, "Columns");
  g->add_option("--s", gen.s, "Sparsity (sparse)");
  g->add_option("--alpha", gen.alpha, "Corruption fraction (robust)");
  g->add_option("--noise-sigma", gen.noise_sigma, "Additive noise standard deviation (sparse)");
  g->add_option("--outlier-scale", gen.outlier_scale, "Outlier range in units of max|X w*| (robust)");
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--out", gen.out, "Output dataset path");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run an experiment document");
  r->add_option("spec", run.spec, "Experiment document (JSON)")->required()->check(CLI::ExistingFile);
  r->add_option("--out", run.out, std::string("Output directory (default $") + kOutDirEnv + " or ./qieo-results)");
  r->add_option("--jobs", run.jobs, "Trials run concurrently; results do not depend on it")
      ->check(CLI::PositiveNumber);
  r->add_flag("--timing", run.timing, "Record wall time (outputs are then no longer byte-reproducible)");
  r->add_flag("--quiet", run.quiet, "No per-trial progress on stderr");

  ReportArgs report;
  auto* rp = app.add_subcommand("report", "Render records.json or summary.csv");
  rp->add_option("input", report.input, "records.json, a run directory, or summary.csv")
      ->required()
      ->check(CLI::ExistingPath);
  rp->add_option("--format", report.format, "csv, markdown or json")
      ->check(CLI::IsMember({"csv", "markdown", "md", "json"}));
  rp->add_option("--aggregation", report.aggregation, "best or median (records only)")
      ->check(CLI::IsMember({"best", "median"}));

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "Exhaustive optimum over all supports of a given size");
  o->add_option("dataset", oracle.dataset, "Dataset file")->required()->check(CLI::ExistingFile);
  o->add_option("--budget", oracle.budget, "Support size (default: the dataset's s or k)")
      ->check(CLI::NonNegativeNumber);

  std::size_t selftest_jobs = 8;
  std::string fault;
  auto* st = app.add_subcommand("selftest", "Run the invariant suites");
  st->add_option("--jobs", selftest_jobs, "Parallel side of the determinism check")->check(CLI::PositiveNumber);
  st->add_option("--inject-fault", fault, "Corrupt one suite (test fixture)")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (g->parsed()) return cmd_gen(gen);
    if (r->parsed()) return cmd_run(run);
    if (rp->parsed()) return cmd_report(report);
    if (o->parsed()) return cmd_oracle(oracle);
    return cmd_selftest(selftest_jobs, fault);
  } catch (const qieo::GuardRefusal& e) {
    std::fprintf(stderr, "refused: %s\n", e.what());
    return kExitGuard;
  } catch (const qieo::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const qieo::ContractViolation& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const qieo::InfeasibleBudget& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
}
