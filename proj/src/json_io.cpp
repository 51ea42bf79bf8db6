#include "qieo/json_io.hpp"

#include <cmath>

namespace qieo {

using nlohmann::json;
using json_field::optional;
using json_field::required;

namespace json_field {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* context) {
  if (!j.is_object()) throw ParseError(std::string(context) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ParseError(std::string(context) + ": unknown field '" + key + "'");
  }
}

}  // namespace json_field

json to_json(const SparseGenConfig& c) {
  return {{"kind", "sparse"}, {"n", c.n}, {"p", c.p}, {"s", c.s}, {"noise_sigma", c.noise_sigma},
          {"seed", c.seed}};
}

json to_json(const RobustGenConfig& c) {
  return {{"kind", "robust"}, {"n", c.n}, {"p", c.p}, {"alpha", c.alpha},
          {"outlier_scale", c.outlier_scale}, {"seed", c.seed}};
}

SparseGenConfig sparse_gen_from_json(const json& j) {
  json_field::reject_unknown(j, {"kind", "n", "p", "s", "noise_sigma", "seed"}, "sparse generator");
  SparseGenConfig c;
  c.n = required<std::size_t>(j, "n");
  c.p = required<std::size_t>(j, "p");
  c.s = required<std::size_t>(j, "s");
  c.noise_sigma = optional<double>(j, "noise_sigma", 0.0);
  c.seed = optional<std::uint64_t>(j, "seed", 0);
  return c;
}

RobustGenConfig robust_gen_from_json(const json& j) {
  json_field::reject_unknown(j, {"kind", "n", "p", "alpha", "outlier_scale", "seed"},
                             "robust generator");
  RobustGenConfig c;
  c.n = required<std::size_t>(j, "n");
  c.p = required<std::size_t>(j, "p");
  c.alpha = required<double>(j, "alpha");
  c.outlier_scale = optional<double>(j, "outlier_scale", 5.0);
  c.seed = optional<std::uint64_t>(j, "seed", 0);
  return c;
}

json dataset_to_json(const Dataset& ds) {
  json j;
  j["format_version"] = kDatasetFormatVersion;
  j["kind"] = to_string(ds.kind);
  j["n"] = ds.n();
  j["p"] = ds.p();
  j["s_or_k"] = ds.budget();
  j["seed"] = ds.seed();
  j["generator_config"] = std::visit([](const auto& c) { return to_json(c); }, ds.provenance);
  j["X"] = std::vector<double>(ds.x.data().begin(), ds.x.data().end());
  j["y"] = ds.y;
  j["w_star"] = ds.w_star;
  j["true_support"] = ds.true_support;
  if (ds.b_star) j["b_star"] = *ds.b_star;
  return j;
}

namespace {

Vector real_array(const json& j, const char* key, std::size_t expected) {
  auto v = required<std::vector<double>>(j, key);
  if (v.size() != expected) {
    throw ParseError(std::string("field '") + key + "': length " + std::to_string(v.size()) +
                     " does not match declared " + std::to_string(expected));
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw ParseError(std::string("field '") + key + "': entry " + std::to_string(i) + " not finite");
    }
  }
  return v;
}

}  // namespace

Dataset dataset_from_json(const json& j) {
  json_field::reject_unknown(j,
                             {"format_version", "kind", "n", "p", "s_or_k", "seed",
                              "generator_config", "X", "y", "w_star", "true_support", "b_star"},
                             "dataset");
  const int version = required<int>(j, "format_version");
  if (version != kDatasetFormatVersion) {
    throw ParseError("field 'format_version': unsupported version " + std::to_string(version));
  }
  Dataset ds;
  const auto kind = required<std::string>(j, "kind");
  if (kind == "sparse") {
    ds.kind = DatasetKind::sparse;
  } else if (kind == "robust") {
    ds.kind = DatasetKind::robust;
  } else {
    throw ParseError("field 'kind': expected sparse or robust, got '" + kind + "'");
  }
  const auto n = required<std::size_t>(j, "n");
  const auto p = required<std::size_t>(j, "p");
  const auto budget = required<std::size_t>(j, "s_or_k");
  const auto seed = required<std::uint64_t>(j, "seed");
  try {
    const json& gc = j.at("generator_config");
    if (ds.kind == DatasetKind::sparse) {
      ds.provenance = sparse_gen_from_json(gc);
    } else {
      ds.provenance = robust_gen_from_json(gc);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("field 'generator_config': ") + e.what());
  } catch (const ParseError& e) {
    throw ParseError(std::string("field 'generator_config': ") + e.what());
  }
  if (ds.seed() != seed) throw ParseError("field 'seed': disagrees with generator_config.seed");

  ds.x = DenseMatrix(n, p, real_array(j, "X", n * p));
  ds.y = real_array(j, "y", n);
  ds.w_star = real_array(j, "w_star", p);
  ds.true_support = required<std::vector<std::size_t>>(j, "true_support");
  if (ds.true_support.size() != budget) {
    throw ParseError("field 'true_support': " + std::to_string(ds.true_support.size()) +
                     " indices but s_or_k = " + std::to_string(budget));
  }
  const std::size_t limit = ds.kind == DatasetKind::sparse ? p : n;
  for (std::size_t i : ds.true_support) {
    if (i >= limit) throw ParseError("field 'true_support': index " + std::to_string(i) + " out of range");
  }
  if (ds.kind == DatasetKind::robust) {
    ds.b_star = real_array(j, "b_star", n);
  } else if (j.contains("b_star")) {
    throw ParseError("field 'b_star': only valid for robust datasets");
  }
  return ds;
}

}  // namespace qieo
