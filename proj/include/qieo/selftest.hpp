#pragma once

// Invariant suites behind `qieo selftest`.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qieo {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;  // the measured quantity, or the failure reason
  double seconds = 0.0;
};

struct SelftestOptions {
  /// Name of one suite whose computation is deliberately corrupted, to prove
  /// the suite can fail. Test fixture only.
  std::optional<std::string> inject_fault;
  std::size_t parallel_jobs = 8;  // the "many jobs" side of the determinism suite
};

/// amplitude_normalization, measurement_statistics, repair_symmetry,
/// residual_orthogonality, monotone_history, determinism.
std::span<const std::string_view> selftest_suites();

/// Runs every suite; never throws for a failing suite (the failure is in the result).
/// Throws ContractViolation if inject_fault names no suite.
std::vector<SuiteResult> run_selftest(const SelftestOptions& options = {});

}  // namespace qieo
