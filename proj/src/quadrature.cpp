#include "fmqed/quadrature.hpp"

#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace fmqed {

namespace {

std::mutex g_rule_mutex;

QuadRule make_legendre(int n) {
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[n - 1 - i] = x;
    r.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Golub-Welsch for the starting guess, Newton polish on the orthonormal
// recurrence, weights from the Christoffel function.
QuadRule make_hermite(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadRule r;
  r.x = es.eigenvalues();
  r.w.resize(n);
  r.w_scaled.resize(n);
  std::vector<double> h(n + 1);
  for (int i = 0; i < n; ++i) {
    double x = r.x[i];
    for (int it = 0; it < 20; ++it) {
      hermite_functions(x, n, h.data());
      // h_n'(x) = sqrt(2n) h_{n-1} - x h_n, and h_n(x) = 0 at a node
      double d = std::sqrt(2.0 * n) * h[n - 1] - x * h[n];
      double dx = h[n] / d;
      x -= dx;
      if (std::abs(dx) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    r.x[i] = x;
    hermite_functions(x, n - 1, h.data());
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += h[k] * h[k];
    r.w_scaled[i] = 1.0 / s;
    r.w[i] = r.w_scaled[i] * std::exp(-x * x);
  }
  return r;
}

}  // namespace

const QuadRule& gauss_legendre(int n) {
  static std::map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_legendre(n)).first;
  return it->second;
}

const QuadRule& gauss_hermite(int n) {
  static std::map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lock(g_rule_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_hermite(n)).first;
  return it->second;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = std::min(x.size(), y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fmqed
