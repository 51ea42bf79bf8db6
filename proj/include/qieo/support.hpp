#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qieo/rng.hpp"

namespace qieo {

/// Classical bitstring from a measurement; bit i set means index i is selected
/// (a feature for sparse recovery, a presumed-corrupted row for robust regression).
class CandidateSupport {
 public:
  CandidateSupport() = default;
  explicit CandidateSupport(std::size_t m) : bits_(m, 0) {}
  /// Throws ContractViolation when an index is >= m.
  static CandidateSupport from_indices(std::size_t m, std::span<const std::size_t> indices);
  /// Parses "0110..."; throws ContractViolation on other characters.
  static CandidateSupport from_string(std::string_view text);

  std::size_t size() const noexcept { return bits_.size(); }
  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool value = true) { bits_[i] = value ? 1 : 0; }
  std::size_t count() const noexcept;
  std::vector<std::size_t> indices() const;
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }
  std::string to_string() const;

  friend bool operator==(const CandidateSupport&, const CandidateSupport&) = default;
  friend auto operator<=>(const CandidateSupport&, const CandidateSupport&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct CandidateSupportHash {
  std::size_t operator()(const CandidateSupport& s) const noexcept;
};

/// Makes popcount exactly `budget`: clears uniformly chosen ones when there are
/// too many, sets uniformly chosen zeros when there are too few.
/// Throws ContractViolation when budget > bits.size().
void repair(CandidateSupport& bits, std::size_t budget, Rng& rng);

}  // namespace qieo
