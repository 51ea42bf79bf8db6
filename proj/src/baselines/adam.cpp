#include <chrono>
#include <cmath>
#include <string>

#include "qieo/baselines.hpp"
#include "qieo/error.hpp"
#include "qieo/simd/kernels.hpp"

namespace qieo {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ContractViolation("ADAM learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ContractViolation("ADAM betas must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw ContractViolation("ADAM epsilon must be positive");
  if (iterations < 1) throw ContractViolation("ADAM iterations must be >= 1");
  if (!(l1_weight >= 0.0)) throw ContractViolation("ADAM l1_weight must be >= 0");
  if (!(support_threshold >= 0.0)) throw ContractViolation("ADAM support_threshold must be >= 0");
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

class Adam {
 public:
  Adam(const AdamConfig& c, std::size_t size) : c_(c), m_(size, 0.0), v_(size, 0.0) {}

  void step(Vector& theta, const Vector& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(c_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(c_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m_[i] = c_.beta1 * m_[i] + (1.0 - c_.beta1) * grad[i];
      v_[i] = c_.beta2 * v_[i] + (1.0 - c_.beta2) * grad[i] * grad[i];
      theta[i] -= c_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + c_.epsilon);
    }
  }

 private:
  const AdamConfig& c_;
  Vector m_, v_;
  std::size_t t_ = 0;
};

void check_finite(const Vector& v, std::size_t iteration) {
  for (double e : v) {
    if (!std::isfinite(e)) {
      throw SolverError("ADAM diverged: non-finite iterate at iteration " + std::to_string(iteration));
    }
  }
}

CandidateSupport threshold_support(const Vector& v, double threshold) {
  CandidateSupport out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > threshold) out.set(i);
  }
  return out;
}

// r = y - X w - b (b may be empty)
Vector residual(const DenseMatrix& x, std::span<const double> y, const Vector& w, const Vector& b) {
  Vector r(y.begin(), y.end());
  const Vector xw = x.multiply(w);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= xw[i] + (b.empty() ? 0.0 : b[i]);
  return r;
}

double l1(const Vector& v) {
  double s = 0.0;
  for (double e : v) s += std::abs(e);
  return s;
}

}  // namespace

SolverResult run_adam(const SparseRecoveryProblem& problem, const AdamConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const DenseMatrix& x = problem.design();
  const Vector& y = problem.response();
  const double n = static_cast<double>(x.rows());
  Vector w(x.cols(), 0.0);
  Adam opt(config, w.size());
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    const Vector r = residual(x, y, w, {});
    Vector g = x.transpose_multiply(r);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = -2.0 / n * g[j] + config.l1_weight * sign(w[j]);
    opt.step(w, g);
    check_finite(w, it);
  }
  SolverResult result;
  result.best_bits = threshold_support(w, config.support_threshold);
  result.best_fitness = simd::sum_squares(residual(x, y, w, {})) / n + config.l1_weight * l1(w);
  result.weights = std::move(w);
  result.generations_run = config.iterations;
  result.history.emplace_back(config.iterations - 1, result.best_fitness);
  result.wall_time = std::chrono::steady_clock::now() - started;
  return result;
}

SolverResult run_adam(const RobustRegressionProblem& problem, const AdamConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const DenseMatrix& x = problem.design();
  const auto y = problem.response();
  const std::size_t rows = x.rows();
  const std::size_t p = x.cols();
  const double n = static_cast<double>(rows);
  // theta = [w; b] over the extended dictionary [X, I].
  Vector theta(p + rows, 0.0);
  Vector w(p), b(rows);
  Adam opt(config, theta.size());
  auto split = [&] {
    std::copy_n(theta.begin(), p, w.begin());
    std::copy(theta.begin() + static_cast<std::ptrdiff_t>(p), theta.end(), b.begin());
  };
  Vector g(theta.size());
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    split();
    const Vector r = residual(x, y, w, b);
    const Vector gw = x.transpose_multiply(r);
    for (std::size_t j = 0; j < p; ++j) g[j] = -2.0 / n * gw[j];
    for (std::size_t i = 0; i < rows; ++i) g[p + i] = -2.0 / n * r[i] + config.l1_weight * sign(b[i]);
    opt.step(theta, g);
    check_finite(theta, it);
  }
  split();
  SolverResult result;
  result.best_bits = threshold_support(b, config.support_threshold);
  result.best_fitness = simd::sum_squares(residual(x, y, w, b)) / n + config.l1_weight * l1(b);
  result.weights = w;
  result.corruption = b;
  result.generations_run = config.iterations;
  result.history.emplace_back(config.iterations - 1, result.best_fitness);
  result.wall_time = std::chrono::steady_clock::now() - started;
  return result;
}

}  // namespace qieo
