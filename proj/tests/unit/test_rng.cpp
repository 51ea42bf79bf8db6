#include <doctest.h>

#include <set>

#include "qieo/rng.hpp"

using namespace qieo;

TEST_CASE("same seed, same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Rng c = Rng::substream(7, 3), d = Rng::substream(7, 3);
  for (int i = 0; i < 100; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("substreams of one seed differ") {
  std::set<double> firsts;
  for (std::uint64_t s = 0; s < 1000; ++s) firsts.insert(Rng::substream(5, s).uniform());
  CHECK(firsts.size() == 1000);
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

TEST_CASE("splitmix64 finalizer reference values") {
  // First two outputs of the published splitmix64 generator seeded with 0.
  CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(mix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("FNV-1a name hash reference values") {
  CHECK(hash_name("") == 0xcbf29ce484222325ULL);
  CHECK(hash_name("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hash_name("qieo") != hash_name("ga"));
}

TEST_CASE("uniform and below stay in range") {
  Rng r(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = r.uniform(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v < 3.0);
    CHECK(r.below(7) < 7);
  }
  CHECK(r.below(1) == 0);
}
