#include "qieo/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qieo/error.hpp"
#include "qieo/json_io.hpp"
#include "qieo/rng.hpp"
#include "qieo/simd/kernels.hpp"

namespace qieo {

namespace {

// Stream ids for the generators; fixed so regenerated datasets stay identical.
constexpr std::uint64_t kStreamDesign = 1;
constexpr std::uint64_t kStreamWeights = 2;
constexpr std::uint64_t kStreamNoise = 3;
constexpr std::uint64_t kStreamCorruption = 0x100;

DenseMatrix normalized_gaussian_design(std::size_t n, std::size_t p, Rng& rng) {
  DenseMatrix x(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x(i, j) = rng.normal();
  }
  for (std::size_t j = 0; j < p; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += x(i, j) * x(i, j);
    const double norm = std::sqrt(ss);
    for (std::size_t i = 0; i < n; ++i) x(i, j) /= norm;
  }
  return x;
}

std::vector<std::size_t> uniform_subset(std::size_t m, std::size_t k, Rng& rng) {
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t t = 0; t < k; ++t) std::swap(pool[t], pool[t + rng.below(m - t)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

void SparseGenConfig::validate() const {
  if (n < 1) throw ContractViolation("sparse generator: n must be >= 1");
  if (s < 1 || s > p) {
    throw ContractViolation("sparse generator: need 1 <= s <= p, got s=" + std::to_string(s) +
                            ", p=" + std::to_string(p));
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ContractViolation("sparse generator: noise_sigma must be finite and >= 0");
  }
}

std::vector<std::string> SparseGenConfig::warnings() const {
  std::vector<std::string> out;
  const double needed = static_cast<double>(s) * std::log(static_cast<double>(p));
  if (static_cast<double>(n) < needed) {
    std::ostringstream msg;
    msg << "sample-complexity condition n >= s*ln(p) fails: n=" << n << " < " << s << "*ln(" << p
        << ") = " << needed;
    out.push_back(msg.str());
  }
  return out;
}

std::size_t RobustGenConfig::k() const {
  // The epsilon keeps e.g. 0.3 * 600 from landing on 179.999...
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
}

void RobustGenConfig::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw ContractViolation("robust generator: alpha must lie in [0, 1)");
  }
  if (!(outlier_scale > 0.0) || !std::isfinite(outlier_scale)) {
    throw ContractViolation("robust generator: outlier_scale must be positive");
  }
  if (p < 1) throw ContractViolation("robust generator: p must be >= 1");
  const std::size_t kk = k();
  if (kk >= n || n - kk <= p) {
    throw ContractViolation("robust generator: k=" + std::to_string(kk) + " leaves n-k=" +
                            std::to_string(kk >= n ? 0 : n - kk) + " <= p=" + std::to_string(p) +
                            " clean rows");
  }
}

std::string to_string(DatasetKind kind) { return kind == DatasetKind::sparse ? "sparse" : "robust"; }

std::uint64_t Dataset::seed() const {
  return std::visit([](const auto& c) { return c.seed; }, provenance);
}

Dataset gen_robust(const RobustGenConfig& config) {
  config.validate();
  Rng design_rng = Rng::substream(config.seed, kStreamDesign);
  Rng weight_rng = Rng::substream(config.seed, kStreamWeights);
  const std::size_t kk = config.k();
  Rng corrupt_rng = Rng::substream(config.seed, kStreamCorruption + kk);

  Dataset ds;
  ds.kind = DatasetKind::robust;
  ds.provenance = config;
  ds.x = normalized_gaussian_design(config.n, config.p, design_rng);
  ds.w_star.resize(config.p);
  for (double& w : ds.w_star) w = weight_rng.normal();
  const double wnorm = std::sqrt(simd::sum_squares(ds.w_star));
  for (double& w : ds.w_star) w /= wnorm;

  const Vector y_clean = ds.x.multiply(ds.w_star);
  double ymax = 0.0;
  for (double v : y_clean) ymax = std::max(ymax, std::abs(v));
  const double bound = config.outlier_scale * ymax;

  ds.true_support = uniform_subset(config.n, kk, corrupt_rng);
  Vector b(config.n, 0.0);
  for (std::size_t i : ds.true_support) b[i] = corrupt_rng.uniform(-bound, bound);
  ds.y.resize(config.n);
  for (std::size_t i = 0; i < config.n; ++i) ds.y[i] = y_clean[i] + b[i];
  ds.b_star = std::move(b);
  return ds;
}

Dataset gen_sparse(const SparseGenConfig& config) {
  config.validate();
  Rng design_rng = Rng::substream(config.seed, kStreamDesign);
  Rng weight_rng = Rng::substream(config.seed, kStreamWeights);
  Rng noise_rng = Rng::substream(config.seed, kStreamNoise);

  Dataset ds;
  ds.kind = DatasetKind::sparse;
  ds.provenance = config;
  ds.x = normalized_gaussian_design(config.n, config.p, design_rng);
  ds.true_support = uniform_subset(config.p, config.s, weight_rng);
  ds.w_star.assign(config.p, 0.0);
  for (std::size_t j : ds.true_support) ds.w_star[j] = weight_rng.normal();
  ds.y = ds.x.multiply(ds.w_star);
  if (config.noise_sigma > 0.0) {
    for (double& v : ds.y) v += config.noise_sigma * noise_rng.normal();
  }
  return ds;
}

std::string dataset_to_text(const Dataset& ds) { return dataset_to_json(ds).dump(1); }

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << dataset_to_text(ds) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Dataset dataset_from_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }
  return dataset_from_json(doc);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("dataset: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return dataset_from_text(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace qieo
