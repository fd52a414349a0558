#ifndef FMQED_COULOMB_HPP
#define FMQED_COULOMB_HPP

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fmqed/config.hpp"
#include "fmqed/lattice.hpp"
#include "fmqed/types.hpp"

namespace fmqed {

using ParticlePositions = std::vector<Vec3>;
using Box = std::array<double, 3>;

// Cutoff Coulomb term over a mode set, as a function of the flat 3n
// particle coordinate vector.
class CoulombTerm {
 public:
  CoulombTerm(const SimulationConfig& config, const ModeSet& lambda1);
  int n() const { return static_cast<int>(charges_.size()); }
  double value(const VecX& x) const;
  VecX gradient(const VecX& x) const;

 private:
  std::vector<double> charges_;
  std::vector<Vec3> k_;     // halved set
  std::vector<double> w_;   // 2 * (2 pi / |V|) / |k|^2 (doubling over +-k)
};

double potential_V1(const ParticlePositions& x, const std::vector<double>& charges,
                    const ModeSet& lambda1, const SimulationConfig& config);

struct LatticeSummand {
  std::string name;
  std::function<double(const Vec3&)> phi;
  // non-increasing radial majorant
  std::function<double(double)> bound;
  // phi depends only on |k|; enables the continuum tail estimate
  bool radial = false;
  double analytic_limit = std::numeric_limits<double>::quiet_NaN();
};

// |phi(k)| <= bound(|k|) on sampled k and r^2 bound(r) bounded on a log grid.
bool check_majorant(const LatticeSummand& s, int samples = 2000, unsigned seed = 7);

struct RiemannOptions {
  double rtol = 1e-3;
  long long max_points = 400'000'000;
  double r0 = 8.0;
  double growth = 1.5;
  int jobs = 1;
  // nonzero: enumerate slabs in a shuffled order (summation-order test)
  unsigned shuffle_seed = 0;
};

struct RiemannResult {
  double value = 0;          // truncated + tail_estimate
  double truncated = 0;      // (2 pi)^3/|V| sum over |k| < radius
  double tail_bound = 0;     // rigorous majorant bound on the omitted part
  double tail_estimate = 0;  // continuum integral beyond radius (radial summands)
  double radius = 0;
  long long points = 0;
  bool converged = false;
};

// Shell-by-shell sum of (2 pi)^3/|V| sum_{k != 0} phi(k). Stops when
// tail_bound - tail_estimate <= rtol |value| (the omitted part without an
// estimate for non-radial summands); converged=false if the point budget runs out.
RiemannResult riemann_sum(const LatticeSummand& summand, const Box& L,
                          const RiemannOptions& opt = {});

// Rigorous tail: 4 pi int_{R-d}^inf (u + d/2)^2 bound(u) du, d = cell diagonal.
double majorant_tail_bound(const std::function<double(double)>& bound, double R, double d);

struct Mollifier {
  std::string name;
  std::function<double(double)> chi;  // radial profile, chi(0) = 1
  double cutoff = 0;                  // chi(q) negligible for q > cutoff
};
Mollifier gaussian_mollifier();
Mollifier bump_mollifier();

// Smooth step: 1 on [0,1], 0 on [2, inf)
double bump_profile(double r);

double mollified_coulomb(const ParticlePositions& x, const std::vector<double>& charges,
                         const Box& L, double eps, const Mollifier& chi = gaussian_mollifier(),
                         int jobs = 1);

// Continuum pair limit of the Gaussian-mollified sum:
// sum_{j != l} e_j e_l erf(|d|/(2 eps)) / (2 |d|).
double screened_coulomb_target(const ParticlePositions& x, const std::vector<double>& charges,
                               double eps);
// 1/(2|d|)
double continuum_coulomb_oracle(const Vec3& d);
// 1/2 sum_{j != l} e_j e_l / |x_j - x_l|
double coulomb_pair_limit(const ParticlePositions& x, const std::vector<double>& charges);

LatticeSummand riemann_test_summand();     // 1/(|k|^2 (1 + |k|^2)), integral 2 pi^2
LatticeSummand counterexample_summand();   // bump(|k|)/|k|^2, integral 6 pi

struct CounterexampleRow {
  double L23;
  Box L;
  double sum;
  double integral;
  double excess;
  double lower_bound;  // (2 pi)^3/|V| Phi(2 pi/L1, 0, 0)
};
// Geometry L = (l^2, l, l); the first-axis terms keep the sum above the integral.
std::vector<CounterexampleRow> counterexample_study(const std::vector<double>& l_values,
                                                    int jobs = 1);

struct CoulombLimitRow {
  double L;
  double eps;
  double value;
  double screened_target;
  double limit;  // eps -> 0, L -> inf
  double rel_err_screened;
};
// Cube boxes of the listed edges with matching eps.
std::vector<CoulombLimitRow> coulomb_refinement(const ParticlePositions& x,
                                                const std::vector<double>& charges,
                                                const std::vector<double>& edges,
                                                const std::vector<double>& eps, int jobs = 1);

}  // namespace fmqed

#endif
