#include "qieo/support.hpp"

#include <algorithm>

#include "qieo/error.hpp"

namespace qieo {

CandidateSupport CandidateSupport::from_indices(std::size_t m, std::span<const std::size_t> indices) {
  CandidateSupport s(m);
  for (std::size_t i : indices) {
    if (i >= m) {
      throw ContractViolation("CandidateSupport: index " + std::to_string(i) + " >= length " +
                              std::to_string(m));
    }
    s.set(i);
  }
  return s;
}

CandidateSupport CandidateSupport::from_string(std::string_view text) {
  CandidateSupport s(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      s.set(i);
    } else if (text[i] != '0') {
      throw ContractViolation("CandidateSupport: expected 0/1, got '" + std::string(1, text[i]) + "'");
    }
  }
  return s;
}

std::size_t CandidateSupport::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> CandidateSupport::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(i);
  }
  return out;
}

std::string CandidateSupport::to_string() const {
  std::string out(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out[i] = '1';
  }
  return out;
}

std::size_t CandidateSupportHash::operator()(const CandidateSupport& s) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ s.size();
  std::uint64_t word = 0;
  unsigned filled = 0;
  for (std::uint8_t b : s.bits()) {
    word = (word << 1) | b;
    if (++filled == 64) {
      h = mix64(h ^ word);
      word = 0;
      filled = 0;
    }
  }
  return static_cast<std::size_t>(mix64(h ^ word ^ filled));
}

void repair(CandidateSupport& bits, std::size_t budget, Rng& rng) {
  const std::size_t m = bits.size();
  if (budget > m) {
    throw ContractViolation("repair: budget " + std::to_string(budget) + " exceeds length " +
                            std::to_string(m));
  }
  std::size_t ones = bits.count();
  if (ones == budget) return;
  const bool drop = ones > budget;
  // Partial Fisher-Yates over the positions holding the value to flip.
  std::vector<std::size_t> pool;
  pool.reserve(drop ? ones : m - ones);
  for (std::size_t i = 0; i < m; ++i) {
    if (bits.test(i) == drop) pool.push_back(i);
  }
  std::size_t flips = drop ? ones - budget : budget - ones;
  for (std::size_t t = 0; t < flips; ++t) {
    const std::size_t pick = t + rng.below(pool.size() - t);
    std::swap(pool[t], pool[pick]);
    bits.set(pool[t], !drop);
  }
}

}  // namespace qieo
