#include "hhlab/common.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

namespace hhlab {

Real sphere_surface(int d) {
  if (d < 1) throw config_error("sphere_surface: d must be >= 1");
  return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
}

Real fit_slope(const Array& x, const Array& y) {
  if (x.size() != y.size() || x.size() < 2) throw config_error("fit_slope: need >= 2 samples");
  const Real mx = x.mean();
  const Real my = y.mean();
  const Real var = ((x - mx) * (x - mx)).sum();
  if (var == 0.0) throw config_error("fit_slope: degenerate abscissa");
  return ((x - mx) * (y - my)).sum() / var;
}

namespace {

struct GaussRule {
  Array nodes;    // on [-1, 1]
  Array weights;  // sum = 2
};

// Golub-Welsch: nodes/weights from the symmetric tridiagonal Jacobi matrix.
const GaussRule& legendre_rule(int order) {
  static std::map<int, GaussRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  Matrix J = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const Real b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  GaussRule rule;
  rule.nodes = es.eigenvalues().array();
  rule.weights = 2.0 * es.eigenvectors().row(0).array().square();
  return cache.emplace(order, std::move(rule)).first->second;
}

}  // namespace

void gauss_legendre(int order, Real a, Real b, Array& nodes, Array& weights) {
  if (order < 1) throw config_error("gauss_legendre: order must be >= 1");
  const GaussRule& rule = legendre_rule(order);
  const Real mid = 0.5 * (a + b);
  const Real half = 0.5 * (b - a);
  nodes = mid + half * rule.nodes;
  weights = half * rule.weights;
}

void parallel_for(Index n, int threads, const std::function<void(Index)>& fn) {
  if (n <= 0) return;
  const int workers = std::min<Index>(std::max(1, threads), n);
  if (workers == 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (Index i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace hhlab
