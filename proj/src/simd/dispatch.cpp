#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "qieo/simd/kernels.hpp"

namespace qieo::simd {

#ifdef QIEO_HAVE_AVX2_KERNELS
const KernelTable& avx2_table_unchecked() noexcept;
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(QIEO_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Level level) noexcept {
  switch (level) {
    case Level::scalar:
      return &scalar_table();
    case Level::avx2:
      return avx2_table();
  }
  return nullptr;
}

const KernelTable* initial_table() noexcept {
  if (const char* env = std::getenv("QIEO_SIMD")) {
    if (auto level = parse_level(env)) {
      if (const KernelTable* t = table_for(*level)) return t;
    }
  }
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& active() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() noexcept {
#ifdef QIEO_HAVE_AVX2_KERNELS
  static const bool ok = cpu_has_avx2();
  return ok ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

bool supported(Level level) noexcept { return table_for(level) != nullptr; }

Level active_level() noexcept { return active().load(std::memory_order_relaxed)->level; }

void set_level(Level level) {
  const KernelTable* t = table_for(level);
  if (t == nullptr) {
    throw std::invalid_argument("SIMD level '" + std::string(level_name(level)) +
                                "' is not supported on this host");
  }
  active().store(t, std::memory_order_relaxed);
}

std::string_view level_name(Level level) noexcept {
  return level == Level::avx2 ? "avx2" : "scalar";
}

std::optional<Level> parse_level(std::string_view name) noexcept {
  if (name == "scalar") return Level::scalar;
  if (name == "avx2") return Level::avx2;
  if (name == "auto") return avx2_table() ? Level::avx2 : Level::scalar;
  return std::nullopt;
}

const KernelTable& kernels() noexcept { return *active().load(std::memory_order_relaxed); }

}  // namespace qieo::simd
