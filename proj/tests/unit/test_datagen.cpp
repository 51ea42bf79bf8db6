#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "qieo/datagen.hpp"
#include "qieo/error.hpp"
#include "qieo/numerics.hpp"

using namespace qieo;

namespace {

double column_norm(const DenseMatrix& x, std::size_t j) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, j) * x(i, j);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("robust recipe: norms, outlier count and magnitude") {
  const Dataset ds = gen_robust({.n = 600, .p = 100, .alpha = 0.1, .seed = 7});
  CHECK(ds.kind == DatasetKind::robust);
  CHECK(ds.budget() == 60);
  REQUIRE(ds.b_star.has_value());
  const auto nz = std::count_if(ds.b_star->begin(), ds.b_star->end(), [](double b) { return b != 0.0; });
  CHECK(nz == 60);
  for (std::size_t j = 0; j < 100; ++j) CHECK(std::abs(column_norm(ds.x, j) - 1.0) <= 1e-12);
  double wn = 0.0;
  for (double w : ds.w_star) wn += w * w;
  CHECK(std::abs(std::sqrt(wn) - 1.0) <= 1e-12);

  const Vector clean = ds.x.multiply(ds.w_star);
  double inf = 0.0;
  for (double v : clean) inf = std::max(inf, std::abs(v));
  for (std::size_t i = 0; i < 600; ++i) {
    CHECK(std::abs((*ds.b_star)[i]) <= 5.0 * inf);
    // y = X w* + b exactly as generated: off S* the residual is rounding only.
    if ((*ds.b_star)[i] == 0.0) CHECK(std::abs(ds.y[i] - clean[i]) <= 1e-12);
  }
  CHECK(std::is_sorted(ds.true_support.begin(), ds.true_support.end()));
  for (std::size_t i : ds.true_support) CHECK((*ds.b_star)[i] != 0.0);
}

TEST_CASE("robust recipe with alpha = 0 has no corruption") {
  const Dataset ds = gen_robust({.n = 200, .p = 20, .alpha = 0.0, .seed = 1});
  CHECK(ds.true_support.empty());
  for (double b : *ds.b_star) CHECK(b == 0.0);
  const Vector clean = ds.x.multiply(ds.w_star);
  for (std::size_t i = 0; i < 200; ++i) CHECK(ds.y[i] == clean[i]);
}

TEST_CASE("alpha sweep at one seed shares X and w*") {
  const Dataset a = gen_robust({.n = 600, .p = 100, .alpha = 0.1, .seed = 7});
  const Dataset b = gen_robust({.n = 600, .p = 100, .alpha = 0.4, .seed = 7});
  CHECK(a.x == b.x);
  CHECK(a.w_star == b.w_star);
  CHECK(b.budget() == 240);
  CHECK(a.y != b.y);
}

TEST_CASE("robust config validation") {
  RobustGenConfig c{.n = 600, .p = 100, .alpha = 0.9, .seed = 0};
  CHECK(c.k() == 540);
  CHECK_THROWS_AS(c.validate(), ContractViolation);  // n - k <= p
  c.alpha = 1.0;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c.alpha = 0.1;
  c.outlier_scale = 0.0;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  CHECK_THROWS_AS(gen_robust(c), ContractViolation);
}

TEST_CASE("sparse recipe: planted support is exactly interpolated") {
  const Dataset ds = gen_sparse({.n = 16, .p = 50, .s = 5, .seed = 1});
  CHECK(ds.true_support.size() == 5);
  CHECK_FALSE(ds.b_star.has_value());
  for (std::size_t j = 0; j < 50; ++j) CHECK(std::abs(column_norm(ds.x, j) - 1.0) <= 1e-12);
  for (std::size_t j = 0; j < 50; ++j) {
    const bool on = std::binary_search(ds.true_support.begin(), ds.true_support.end(), j);
    CHECK((ds.w_star[j] != 0.0) == on);
  }
  CHECK(restricted_least_squares(ds.x, ds.y, ds.true_support).sse <= 1e-20);
}

TEST_CASE("sample-complexity warning uses the natural log") {
  // 20 ln 500 = 124.29 > 80.
  CHECK_FALSE(SparseGenConfig{.n = 80, .p = 500, .s = 20}.warnings().empty());
  // 5 ln 50 = 19.56 > 16 warns as well; 7 ln 100 = 32.2 < 50 does not.
  CHECK_FALSE(SparseGenConfig{.n = 16, .p = 50, .s = 5}.warnings().empty());
  CHECK(SparseGenConfig{.n = 50, .p = 100, .s = 7}.warnings().empty());
  CHECK(SparseGenConfig{.n = 125, .p = 500, .s = 20}.warnings().empty());
}

TEST_CASE("sparse config validation") {
  CHECK_THROWS_AS((SparseGenConfig{.n = 10, .p = 5, .s = 6}.validate()), ContractViolation);
  CHECK_THROWS_AS((SparseGenConfig{.n = 10, .p = 5, .s = 0}.validate()), ContractViolation);
  CHECK_THROWS_AS((SparseGenConfig{.n = 0, .p = 5, .s = 1}.validate()), ContractViolation);
  CHECK_THROWS_AS((SparseGenConfig{.n = 10, .p = 5, .s = 1, .noise_sigma = -1}.validate()), ContractViolation);
}

TEST_CASE("generation is deterministic in the seed") {
  CHECK(gen_sparse({.n = 30, .p = 40, .s = 4, .noise_sigma = 0.1, .seed = 5}) ==
        gen_sparse({.n = 30, .p = 40, .s = 4, .noise_sigma = 0.1, .seed = 5}));
  CHECK_FALSE(gen_sparse({.n = 30, .p = 40, .s = 4, .seed = 5}) == gen_sparse({.n = 30, .p = 40, .s = 4, .seed = 6}));
  CHECK(gen_robust({.n = 100, .p = 10, .alpha = 0.2, .seed = 3}) ==
        gen_robust({.n = 100, .p = 10, .alpha = 0.2, .seed = 3}));
}

TEST_CASE("save and load round-trip bit for bit") {
  const auto dir = std::filesystem::temp_directory_path() / "qieo-test-datagen";
  std::filesystem::create_directories(dir);
  for (const Dataset& ds : {gen_sparse({.n = 20, .p = 30, .s = 3, .noise_sigma = 0.3, .seed = 9}),
                            gen_robust({.n = 80, .p = 6, .alpha = 0.25, .seed = 9})}) {
    const auto path = dir / (to_string(ds.kind) + ".json");
    save_dataset(ds, path);
    const Dataset back = load_dataset(path);
    CHECK(back == ds);
    CHECK(dataset_from_text(dataset_to_text(ds)) == ds);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed dataset documents are rejected with the field named") {
  const Dataset ds = gen_sparse({.n = 6, .p = 4, .s = 2, .seed = 1});
  auto doc = nlohmann::json::parse(dataset_to_text(ds));

  auto expect_error = [](const nlohmann::json& j, const std::string& needle) {
    try {
      (void)dataset_from_text(j.dump());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };
  auto bad_n = doc;
  bad_n["n"] = 7;
  expect_error(bad_n, "X");
  auto short_y = doc;
  short_y["y"].erase(0);
  expect_error(short_y, "y");
  auto no_kind = doc;
  no_kind.erase("kind");
  expect_error(no_kind, "kind");
  auto extra = doc;
  extra["colour"] = 1;
  expect_error(extra, "colour");
  auto bad_support = doc;
  bad_support["true_support"] = {0, 9};
  expect_error(bad_support, "true_support");
  CHECK_THROWS_AS(dataset_from_text("{ not json"), ParseError);
  CHECK_THROWS_AS(load_dataset("/nonexistent/qieo.json"), ParseError);
}
