#ifndef FMQED_QUADRATURE_HPP
#define FMQED_QUADRATURE_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <type_traits>
#include <vector>

#include "fmqed/errors.hpp"
#include "fmqed/types.hpp"

namespace fmqed {

struct QuadRule {
  VecX x;
  VecX w;
  // w_i * exp(x_i^2); only filled for Gauss-Hermite rules
  VecX w_scaled;
};

// Nodes and weights on [-1, 1]. Cached per n.
const QuadRule& gauss_legendre(int n);

// Weight exp(-x^2) on the real line. Cached per n.
const QuadRule& gauss_hermite(int n);

// Orthonormal Hermite functions h_0..h_{nmax} at a (possibly complex) point:
// h_n(x) = (2^n n! sqrt(pi))^{-1/2} H_n(x) exp(-x^2/2).
template <typename Scalar>
void hermite_functions(Scalar x, int nmax, Scalar* out) {
  using std::exp;
  using std::sqrt;
  out[0] = Scalar(std::pow(kPi, -0.25)) * exp(-x * x / 2.0);
  if (nmax >= 1) out[1] = Scalar(std::sqrt(2.0)) * x * out[0];
  for (int n = 1; n < nmax; ++n) {
    out[n + 1] = Scalar(std::sqrt(2.0 / (n + 1))) * x * out[n] -
                 Scalar(std::sqrt(double(n) / (n + 1))) * out[n - 1];
  }
}

// Compensated accumulator; result does not depend on how a caller
// partitions work as long as partial sums are combined in a fixed order.
template <typename T>
struct NeumaierSum {
  T sum{};
  T comp{};
  void add(T v) {
    T t = sum + v;
    if constexpr (std::is_same_v<T, double>) {
      if (std::abs(sum) >= std::abs(v))
        comp += (sum - t) + v;
      else
        comp += (v - t) + sum;
    } else {
      comp += (sum - t) + v;
    }
    sum = t;
  }
  T value() const { return sum + comp; }
};

inline double qnorm(double v) { return std::abs(v); }
inline double qnorm(const cplx& v) { return std::abs(v); }
template <typename Derived>
double qnorm(const Eigen::MatrixBase<Derived>& v) {
  return v.cwiseAbs().maxCoeff();
}

// Fixed-order Gauss-Legendre on [a, b].
template <typename T, typename F>
T gl_fixed(const F& f, double a, double b, int n) {
  const QuadRule& r = gauss_legendre(n);
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  T acc = r.w[0] * f(m + h * r.x[0]);
  for (int i = 1; i < n; ++i) acc += r.w[i] * f(m + h * r.x[i]);
  return acc * h;
}

struct AdaptiveOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  int order = 12;
  int max_depth = 30;
};

namespace detail {
template <typename T, typename F>
T adaptive_panel(const F& f, double a, double b, const T& whole, double tol,
                 const AdaptiveOptions& o, int depth, bool& ok) {
  const double m = 0.5 * (a + b);
  T left = gl_fixed<T>(f, a, m, o.order);
  T right = gl_fixed<T>(f, m, b, o.order);
  T both = left + right;
  if (qnorm(T(both - whole)) <= tol || depth >= o.max_depth) {
    if (depth >= o.max_depth && qnorm(T(both - whole)) > tol) ok = false;
    return both;
  }
  return T(adaptive_panel<T>(f, a, m, left, 0.5 * tol, o, depth + 1, ok) +
           adaptive_panel<T>(f, m, b, right, 0.5 * tol, o, depth + 1, ok));
}
}  // namespace detail

// Adaptive Gauss-Legendre by recursive bisection. The tolerance is
// max(atol, rtol * |estimate|) on the whole interval.
template <typename T, typename F>
T integrate_adaptive(const F& f, double a, double b,
                     const AdaptiveOptions& o = {}) {
  if (a == b) return T(f(a) * 0.0);
  T whole = gl_fixed<T>(f, a, b, o.order);
  double tol = std::max(o.atol, o.rtol * qnorm(whole));
  bool ok = true;
  T v = detail::adaptive_panel<T>(f, a, b, whole, tol, o, 0, ok);
  if (!ok) throw BudgetExhausted("adaptive quadrature did not converge");
  return v;
}

// Tensor Gauss-Legendre over the unit square, n points per side.
template <typename T, typename F>
T gl_unit_square(const F& f, int n) {
  const QuadRule& r = gauss_legendre(n);
  T acc{};
  bool first = true;
  for (int i = 0; i < n; ++i) {
    const double s1 = 0.5 * (r.x[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double s2 = 0.5 * (r.x[j] + 1.0);
      T v = f(s1, s2) * (0.25 * r.w[i] * r.w[j]);
      if (first) {
        acc = v;
        first = false;
      } else {
        acc += v;
      }
    }
  }
  return acc;
}

// Richardson tableau. values[j] computed at step h / ratio^j; the error
// expansion has powers p0, p0 + dp, p0 + 2 dp, ...
// Returns the fully extrapolated value.
template <typename T>
T richardson(const std::vector<T>& values, double ratio, double p0,
             double dp) {
  if (values.empty()) throw ConfigError("richardson: no values");
  std::vector<T> cur = values;
  double p = p0;
  while (cur.size() > 1) {
    const double f = std::pow(ratio, p);
    std::vector<T> next;
    for (size_t j = 0; j + 1 < cur.size(); ++j)
      next.push_back(T((f * cur[j + 1] - cur[j]) / (f - 1.0)));
    cur = std::move(next);
    p += dp;
  }
  return cur[0];
}

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fmqed

#endif
