#include "fmqed/coulomb.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "fmqed/errors.hpp"
#include "fmqed/parallel.hpp"
#include "fmqed/quadrature.hpp"

namespace fmqed {

namespace {

double pair_structure(const Vec3& k, const ParticlePositions& x, const std::vector<double>& e) {
  // sum_{j != l} e_j e_l cos(k.(x_j - x_l)) = |sum_j e_j exp(i k.x_j)|^2 - sum_j e_j^2
  double re = 0, im = 0, self = 0;
  for (size_t j = 0; j < x.size(); ++j) {
    const double ph = k.dot(x[j]);
    re += e[j] * std::cos(ph);
    im += e[j] * std::sin(ph);
    self += e[j] * e[j];
  }
  return re * re + im * im - self;
}

// Adds f(k) for every lattice point with r_lo <= |k| < r_hi into per-s1
// slab accumulators. Slab partials are combined later in s1 order.
template <typename F>
void shell_sweep(const Box& L, double r_lo, double r_hi, int jobs, unsigned shuffle_seed,
                 std::map<int, NeumaierSum<double>>& slabs, long long& points, const F& f) {
  const double d[3] = {2 * kPi / L[0], 2 * kPi / L[1], 2 * kPi / L[2]};
  const double lo2 = r_lo * r_lo, hi2 = r_hi * r_hi;
  const int s1max = static_cast<int>(std::floor(r_hi / d[0]));
  std::vector<int> order(2 * s1max + 1);
  std::iota(order.begin(), order.end(), -s1max);
  std::mt19937_64 rng(shuffle_seed);
  if (shuffle_seed != 0) std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> partial(order.size(), 0.0);
  std::vector<long long> counts(order.size(), 0);
  parallel_for(static_cast<long>(order.size()), jobs, [&](long idx) {
    const int s1 = order[idx];
    const double k1 = s1 * d[0];
    const double rem1 = hi2 - k1 * k1;
    if (rem1 <= 0) return;
    const int s2max = static_cast<int>(std::floor(std::sqrt(rem1) / d[1]));
    std::vector<int> s2s(2 * s2max + 1);
    std::iota(s2s.begin(), s2s.end(), -s2max);
    if (shuffle_seed != 0) {
      std::mt19937_64 r2(shuffle_seed * 1315423911u + static_cast<unsigned>(s1 + 100000));
      std::shuffle(s2s.begin(), s2s.end(), r2);
    }
    NeumaierSum<double> acc;
    long long cnt = 0;
    for (int s2 : s2s) {
      const double k2 = s2 * d[1];
      const double base = k1 * k1 + k2 * k2;
      if (base >= hi2) continue;
      const int s3max = static_cast<int>(std::floor(std::sqrt(hi2 - base) / d[2])) + 1;
      const double rl = lo2 - base;
      int s3min = rl > 0 ? static_cast<int>(std::ceil(std::sqrt(rl) / d[2])) - 1 : 0;
      s3min = std::max(s3min, 0);
      for (int s3 = s3min; s3 <= s3max; ++s3) {
        for (int sg : {1, -1}) {
          if (s3 == 0 && sg < 0) continue;
          const int t3 = sg * s3;
          if (s1 == 0 && s2 == 0 && t3 == 0) continue;
          const Vec3 k(k1, k2, t3 * d[2]);
          const double r2 = k.squaredNorm();
          if (r2 < lo2 || r2 >= hi2) continue;
          acc.add(f(k));
          ++cnt;
        }
      }
    }
    partial[idx] = acc.value();
    counts[idx] = cnt;
  });
  for (size_t i = 0; i < order.size(); ++i) {
    if (counts[i] == 0) continue;
    slabs[order[i]].add(partial[i]);
    points += counts[i];
  }
}

double combine(const std::map<int, NeumaierSum<double>>& slabs) {
  NeumaierSum<double> s;
  for (const auto& [k, v] : slabs) s.add(v.value());
  return s.value();
}

}  // namespace

CoulombTerm::CoulombTerm(const SimulationConfig& config, const ModeSet& lambda1)
    : charges_(config.charges) {
  const double pre = 2 * kPi / config.volume();
  for (const auto& w : lambda1.lambda_prime) {
    k_.push_back(w.k);
    w_.push_back(2.0 * pre / w.k.squaredNorm());
  }
}

double CoulombTerm::value(const VecX& x) const {
  const int n = this->n();
  if (n < 2) return 0.0;
  if (x.size() != 3 * n) throw ConfigError("coordinate vector must have length 3n");
  NeumaierSum<double> acc;
  for (size_t q = 0; q < k_.size(); ++q) {
    double re = 0, im = 0, self = 0;
    for (int j = 0; j < n; ++j) {
      const double ph = k_[q].dot(x.segment<3>(3 * j));
      re += charges_[j] * std::cos(ph);
      im += charges_[j] * std::sin(ph);
      self += charges_[j] * charges_[j];
    }
    acc.add(w_[q] * (re * re + im * im - self));
  }
  return acc.value();
}

VecX CoulombTerm::gradient(const VecX& x) const {
  const int n = this->n();
  VecX g = VecX::Zero(3 * n);
  if (n < 2) return g;
  for (size_t q = 0; q < k_.size(); ++q) {
    cplx S = 0;
    std::vector<cplx> ph(n);
    for (int j = 0; j < n; ++j) {
      ph[j] = std::polar(1.0, k_[q].dot(x.segment<3>(3 * j)));
      S += charges_[j] * ph[j];
    }
    for (int j = 0; j < n; ++j) {
      // d/dx_j of sum_{j' != l} e e cos(k.(x_j' - x_l)) = -2 e_j Im(e^{ik.x_j} conj(S)) k
      const double im = (ph[j] * std::conj(S)).imag();
      g.segment<3>(3 * j) += (-2.0 * w_[q] * charges_[j] * im) * k_[q];
    }
  }
  return g;
}

double potential_V1(const ParticlePositions& x, const std::vector<double>& charges,
                    const ModeSet& lambda1, const SimulationConfig& config) {
  if (x.size() < 2) return 0.0;
  if (charges.size() != x.size()) throw ConfigError("one charge per particle required");
  NeumaierSum<double> acc;
  for (const auto& w : lambda1.lambda) acc.add(pair_structure(w.k, x, charges) / w.k.squaredNorm());
  return 2 * kPi / config.volume() * acc.value();
}

bool check_majorant(const LatticeSummand& s, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logr(std::log(1e-2), std::log(1e2));
  std::normal_distribution<double> gauss;
  for (int i = 0; i < samples; ++i) {
    Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
    dir.normalize();
    const double r = std::exp(logr(rng));
    const double v = std::abs(s.phi(dir * r));
    if (!(v <= s.bound(r) * (1 + 1e-12) + 1e-300)) return false;
  }
  double prev_tail = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 120; ++i) {
    const double r = std::pow(10.0, -3.0 + 0.05 * i);
    const double b = s.bound(r);
    if (!std::isfinite(r * r * b) || b < 0) return false;
    if (i + 1 < 120 && s.bound(r * 1.01) > b * (1 + 1e-12)) return false;
    // integrability of r^2 phi: r^3 phi must eventually decrease
    if (r > 100) {
      const double t = r * r * r * b;
      if (t > prev_tail * (1 + 1e-9)) return false;
      prev_tail = t;
    }
  }
  return true;
}

double majorant_tail_bound(const std::function<double(double)>& bound, double R, double d) {
  const double u0 = std::max(R - d, 0.0);
  auto f = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double u = u0 + t / (1.0 - t);
    const double jac = 1.0 / ((1.0 - t) * (1.0 - t));
    const double w = u + 0.5 * d;
    const double v = w * w * bound(u) * jac;
    return std::isfinite(v) ? v : 0.0;
  };
  AdaptiveOptions o;
  o.rtol = 1e-8;
  o.atol = 1e-15;
  return 4 * kPi * integrate_adaptive<double>(f, 0.0, 1.0, o);
}

RiemannResult riemann_sum(const LatticeSummand& summand, const Box& L, const RiemannOptions& opt) {
  for (double l : L)
    if (!(l > 0)) throw ConfigError("box lengths must be positive");
  const double cell = std::pow(2 * kPi, 3) / (L[0] * L[1] * L[2]);
  const double d = 2 * kPi * std::sqrt(1 / (L[0] * L[0]) + 1 / (L[1] * L[1]) + 1 / (L[2] * L[2]));
  std::map<int, NeumaierSum<double>> slabs;
  RiemannResult res;
  double r_lo = 0, r_hi = opt.r0;
  for (;;) {
    shell_sweep(L, r_lo, r_hi, opt.jobs, opt.shuffle_seed, slabs, res.points, summand.phi);
    res.radius = r_hi;
    res.truncated = cell * combine(slabs);
    res.tail_bound = majorant_tail_bound(summand.bound, r_hi, d);
    res.tail_estimate = 0;
    if (summand.radial) {
      auto f = [&](double t) {
        if (t >= 1.0) return 0.0;
        const double r = r_hi + t / (1.0 - t);
        const double v = r * r * summand.phi(Vec3(r, 0, 0)) / ((1.0 - t) * (1.0 - t));
        return std::isfinite(v) ? v : 0.0;
      };
      AdaptiveOptions o;
      o.rtol = 1e-9;
      o.atol = 1e-15;
      res.tail_estimate = 4 * kPi * integrate_adaptive<double>(f, 0.0, 1.0, o);
    }
    res.value = res.truncated + res.tail_estimate;
    if (res.tail_bound - res.tail_estimate <= opt.rtol * std::abs(res.value)) {
      res.converged = true;
      return res;
    }
    // next shell volume in lattice points
    const double next = r_hi * opt.growth;
    const double est = 4.0 / 3.0 * kPi * (next * next * next - r_hi * r_hi * r_hi) / cell;
    if (res.points + static_cast<long long>(est) > opt.max_points) {
      res.converged = false;
      return res;
    }
    r_lo = r_hi;
    r_hi = next;
  }
}

double bump_profile(double r) {
  auto h = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
  r = std::abs(r);
  if (r <= 1) return 1.0;
  if (r >= 2) return 0.0;
  const double a = h(2 - r), b = h(r - 1);
  return a / (a + b);
}

Mollifier gaussian_mollifier() {
  return {"gaussian", [](double q) { return std::exp(-q * q); }, 6.5};
}

Mollifier bump_mollifier() { return {"bump", bump_profile, 2.0}; }

double mollified_coulomb(const ParticlePositions& x, const std::vector<double>& charges,
                         const Box& L, double eps, const Mollifier& chi, int jobs) {
  if (charges.size() != x.size()) throw ConfigError("one charge per particle required");
  if (!(eps > 0)) throw ConfigError("eps must be positive");
  for (size_t j = 0; j < x.size(); ++j)
    for (size_t l = j + 1; l < x.size(); ++l)
      if ((x[j] - x[l]).norm() == 0.0) throw ConfigError("coincident particles");
  if (x.size() < 2) return 0.0;
  std::map<int, NeumaierSum<double>> slabs;
  long long pts = 0;
  shell_sweep(L, 0.0, chi.cutoff / eps, jobs, 0, slabs, pts, [&](const Vec3& k) {
    const double r2 = k.squaredNorm();
    return chi.chi(eps * std::sqrt(r2)) * pair_structure(k, x, charges) / r2;
  });
  return 2 * kPi / (L[0] * L[1] * L[2]) * combine(slabs);
}

double screened_coulomb_target(const ParticlePositions& x, const std::vector<double>& charges,
                               double eps) {
  double acc = 0;
  for (size_t j = 0; j < x.size(); ++j)
    for (size_t l = 0; l < x.size(); ++l) {
      if (j == l) continue;
      const double r = (x[j] - x[l]).norm();
      if (r == 0) throw ConfigError("coincident particles");
      acc += charges[j] * charges[l] * std::erf(r / (2 * eps)) / (2 * r);
    }
  return acc;
}

double continuum_coulomb_oracle(const Vec3& d) {
  const double r = d.norm();
  if (r == 0) throw ConfigError("separation must be nonzero");
  return 1.0 / (2.0 * r);
}

double coulomb_pair_limit(const ParticlePositions& x, const std::vector<double>& charges) {
  double acc = 0;
  for (size_t j = 0; j < x.size(); ++j)
    for (size_t l = 0; l < x.size(); ++l)
      if (j != l) acc += charges[j] * charges[l] * continuum_coulomb_oracle(x[j] - x[l]);
  return acc;
}

LatticeSummand riemann_test_summand() {
  LatticeSummand s;
  s.name = "inverse_square_lorentzian";
  s.phi = [](const Vec3& k) {
    const double r2 = k.squaredNorm();
    return 1.0 / (r2 * (1.0 + r2));
  };
  s.bound = [](double r) { return 1.0 / (r * r * (1.0 + r * r)); };
  s.radial = true;
  s.analytic_limit = 2 * kPi * kPi;
  return s;
}

LatticeSummand counterexample_summand() {
  LatticeSummand s;
  s.name = "bump_over_square";
  s.phi = [](const Vec3& k) {
    const double r = k.norm();
    return bump_profile(r) / (r * r);
  };
  s.bound = [](double r) { return r < 2 ? 1.0 / (r * r) : 0.0; };
  s.radial = true;
  s.analytic_limit = 6 * kPi;
  return s;
}

std::vector<CounterexampleRow> counterexample_study(const std::vector<double>& l_values,
                                                    int jobs) {
  std::vector<CounterexampleRow> rows;
  const LatticeSummand s = counterexample_summand();
  for (double l : l_values) {
    CounterexampleRow r;
    r.L23 = l;
    r.L = {l * l, l, l};
    RiemannOptions o;
    o.jobs = jobs;
    o.rtol = 1e-12;
    const RiemannResult res = riemann_sum(s, r.L, o);
    if (!res.converged) throw BudgetExhausted("counterexample sum did not converge");
    r.sum = res.value;
    r.integral = s.analytic_limit;
    r.excess = r.sum - r.integral;
    const double V = r.L[0] * r.L[1] * r.L[2];
    r.lower_bound = std::pow(2 * kPi, 3) / V * s.phi(Vec3(2 * kPi / r.L[0], 0, 0));
    rows.push_back(r);
  }
  return rows;
}

std::vector<CoulombLimitRow> coulomb_refinement(const ParticlePositions& x,
                                                const std::vector<double>& charges,
                                                const std::vector<double>& edges,
                                                const std::vector<double>& eps, int jobs) {
  if (edges.size() != eps.size()) throw ConfigError("edges and eps lists must match");
  std::vector<CoulombLimitRow> rows;
  const double limit = coulomb_pair_limit(x, charges);
  for (size_t i = 0; i < edges.size(); ++i) {
    CoulombLimitRow r;
    r.L = edges[i];
    r.eps = eps[i];
    r.value = mollified_coulomb(x, charges, {edges[i], edges[i], edges[i]}, eps[i],
                                gaussian_mollifier(), jobs);
    r.screened_target = screened_coulomb_target(x, charges, eps[i]);
    r.limit = limit;
    r.rel_err_screened = (r.value - r.screened_target) / std::abs(r.screened_target);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace fmqed
