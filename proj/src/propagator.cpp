#include "fmqed/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/LU>

#include "fmqed/errors.hpp"
#include "fmqed/parallel.hpp"
#include "fmqed/quadrature.hpp"

namespace fmqed {

namespace {
const cplx I(0.0, 1.0);

void check_halving(const std::vector<double>& eps) {
  if (eps.empty()) throw ConfigError("at least one regularization level is required");
  for (double e : eps)
    if (!(e > 0)) throw ConfigError("regularization levels must be positive");
  for (size_t i = 1; i < eps.size(); ++i)
    if (std::abs(2 * eps[i] - eps[i - 1]) > 1e-12 * eps[0])
      throw ConfigError("regularization levels must halve");
}
}  // namespace

// ---------------------------------------------------------------- Fresnel

cplx fresnel_gaussian(double a) {
  if (!(a > 0)) throw ConfigError("Fresnel integral needs a > 0");
  return std::sqrt(kPi / a) * std::polar(1.0, kPi / 4);
}

cplx regularized_fresnel(double a, double eps) {
  if (!(a > 0)) throw ConfigError("Fresnel integral needs a > 0");
  if (!(eps > 0)) throw ConfigError("regularization eps must be positive");
  // exp(-(eps theta)^2) < exp(-40) beyond theta_max; panels of a quarter
  // local wavelength in the phase a theta^2
  const double theta_max = std::sqrt(40.0) / eps;
  const QuadRule& r = gauss_legendre(10);
  NeumaierSum<double> re, im;
  double lo = 0;
  for (long j = 1; lo < theta_max; ++j) {
    const double hi = std::min(theta_max, std::sqrt(j * kPi / (2 * a)));
    const double h = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int q = 0; q < 10; ++q) {
      const double th = mid + h * r.x[q];
      const cplx v = r.w[q] * h * std::exp(cplx(-eps * eps * th * th, a * th * th));
      re.add(v.real());
      im.add(v.imag());
    }
    lo = hi;
  }
  return 2.0 * cplx(re.value(), im.value());
}

EpsExtrapolation fresnel_extrapolated(double a, const std::vector<double>& eps) {
  check_halving(eps);
  EpsExtrapolation out;
  out.eps = eps;
  for (double e : eps) out.values.push_back(regularized_fresnel(a, e));
  out.extrapolated = richardson<cplx>(out.values, 2.0, 2.0, 2.0);
  return out;
}

cplx xi_factor_oracle(double k2, double rho, double hbar, double volume) {
  if (!(k2 > 0) || !(rho > 0)) throw ConfigError("xi factor needs |k| > 0 and rho > 0");
  return 4.0 * I * kPi * kPi * hbar * volume / (rho * k2);
}

EpsExtrapolation xi_factor_quadrature(double k2, double rho, double hbar, double volume,
                                      const std::vector<double>& eps) {
  if (!(k2 > 0) || !(rho > 0)) throw ConfigError("xi factor needs |k| > 0 and rho > 0");
  check_halving(eps);
  const double a = rho * k2 / (4 * kPi * hbar * volume);
  EpsExtrapolation out;
  out.eps = eps;
  for (double e : eps) {
    const cplx i1 = regularized_fresnel(1.0, e);
    out.values.push_back(i1 * i1 / a);
  }
  out.extrapolated = richardson<cplx>(out.values, 2.0, 2.0, 2.0);
  return out;
}

// ---------------------------------------------------------------- backends

void require_analytic_valid(const Model& model) {
  if (model.coupled())
    throw ConfigError("analytic-quadratic backend requires vanishing coupling "
                      "(all charges 0 or an empty coupled mode set)");
  if (model.n() >= 2 && model.config().coupled() && model.lambda1().N() > 0)
    throw ConfigError("analytic-quadratic backend cannot represent the Coulomb pair term");
}

GaussianState fundamental_step(const Model& model, const GaussianState& f, double t, double s) {
  require_analytic_valid(model);
  if (t < s) throw ConfigError("fundamental step needs t >= s");
  const int d = model.particle_dim() + model.field_dim();
  if (f.size() != d) throw ConfigError("state does not match the model");
  if (t == s) return f;
  const double rho = t - s, hbar = model.config().hbar;
  GaussianState u = f;
  for (int j = 0; j < model.n(); ++j) {
    const QuadraticKernel K = particle_step_kernel(model.mass(j), rho, hbar);
    for (int m = 0; m < 3; ++m) apply_kernel(u, 3 * j + m, K);
  }
  for (int v = 0; v < model.field_dim(); ++v)
    apply_kernel(u, model.particle_dim() + v,
                 field_step_kernel(model.omega()[v], model.volume(), rho, hbar));
  return u;
}

GaussianState compose(const Model& model, const GaussianState& f, const Subdivision& sub) {
  GaussianState u = f;
  const auto& t = sub.times();
  for (size_t l = 1; l < t.size(); ++l) u = fundamental_step(model, u, t[l], t[l - 1]);
  return u;
}

StateVector fundamental_step(GalerkinStepper& stepper, const StateVector& f, double t, double s) {
  if (t < s) throw ConfigError("fundamental step needs t >= s");
  if (f.c.size() != stepper.dim()) throw ConfigError("state does not match the galerkin basis");
  if (t == s) return f;
  return stepper.step(f, t - s);
}

StateVector compose(GalerkinStepper& stepper, const StateVector& f, const Subdivision& sub,
                    long long budget) {
  StateVector u = f;
  const auto& t = sub.times();
  for (size_t l = 1; l < t.size(); ++l) {
    u = fundamental_step(stepper, u, t[l], t[l - 1]);
    if (stepper.evaluations() > budget)
      throw BudgetExhausted("galerkin kernel evaluation budget exhausted after " +
                            std::to_string(stepper.evaluations()) + " evaluations");
  }
  return u;
}

// ---------------------------------------------------------------- Phi maps

namespace {

struct PhiValues {
  VecX phi;
  VecX phi1;
};

PhiValues evaluate_phi(const Model& model, double rho, const VecX& x, const VecX& y,
                       const VecX& z, const VecX& X, const VecX& Y, const VecX& Z, int nodes) {
  const SimulationConfig& cfg = model.config();
  const int n = model.n(), nf = model.field_dim();
  const double V = model.volume(), c = cfg.c_light;
  const bool coupled = model.coupled();
  const bool pair = n >= 2 && cfg.coupled() && model.lambda1().N() > 0;
  const QuadRule& r = gauss_legendre(nodes);

  VecX gV1 = VecX::Zero(3 * n), gV2 = VecX::Zero(nf);
  std::vector<Vec3> gauge_p(n, Vec3::Zero());
  VecX gauge_f = VecX::Zero(nf);
  std::vector<Vec3> line(n, Vec3::Zero());
  const VecX dxz = x - z;
  const VecX dXZ = X - Z;
  const auto& vp = model.potential();

  for (int i1 = 0; i1 < nodes; ++i1) {
    const double s1 = 0.5 * (r.x[i1] + 1);
    for (int i2 = 0; i2 < nodes; ++i2) {
      const double s2 = 0.5 * (r.x[i2] + 1);
      const double w = 0.25 * r.w[i1] * r.w[i2] * s1;
      const VecX zeta = z + s1 * (x - z) + s1 * s2 * (y - x);
      const VecX zt = Z + s1 * (X - Z) + s1 * s2 * (Y - X);
      if (pair) gV1 += w * model.coulomb().gradient(zeta);
      for (int v = 0; v < nf; ++v) gV2[v] += w * model.omega()[v] * model.omega()[v] * zt[v] / V;
      if (!coupled) continue;
      for (int j = 0; j < n; ++j) {
        const double e = model.charge(j);
        if (e == 0) continue;
        const Vec3 p = zeta.segment<3>(3 * j);
        const Eigen::Matrix3d J = vp.grad_x_tilde_A<double>(p, zt.data());
        const Eigen::Matrix<double, 3, Eigen::Dynamic> D = vp.grad_a_tilde_A<double>(p, zt.data());
        const Vec3 d = dxz.segment<3>(3 * j);
        gauge_p[j] += w * ((J - J.transpose()) * d - D * dXZ);
        gauge_f += (w * e) * (D.transpose() * d);
      }
    }
  }
  if (coupled) {
    for (int q = 0; q < nodes; ++q) {
      const double th = 0.5 * (r.x[q] + 1), w = 0.5 * r.w[q];
      const VecX a = X - th * (X - Y);
      for (int j = 0; j < n; ++j) {
        if (model.charge(j) == 0) continue;
        const Vec3 p = x.segment<3>(3 * j) - th * (x.segment<3>(3 * j) - y.segment<3>(3 * j));
        line[j] += w * vp.tilde_A<double>(p, a.data());
      }
    }
  }
  PhiValues out;
  out.phi = z - 0.5 * (x + y);
  for (int j = 0; j < n; ++j) {
    const double m = model.mass(j), e = model.charge(j);
    if (coupled && e != 0) out.phi.segment<3>(3 * j) += e * rho / (m * c) * (gauge_p[j] + line[j]);
    if (pair) out.phi.segment<3>(3 * j) += rho * rho / m * gV1.segment<3>(3 * j);
  }
  out.phi1 = Z - 0.5 * (X + Y) + rho * V / c * gauge_f + rho * rho * V * gV2;
  return out;
}

}  // namespace

PhiMapPoint phi_maps(const Model& model, double t, double s, const VecX& x, const VecX& y,
                     const VecX& z, const VecX& X, const VecX& Y, const VecX& Z,
                     const PhiOptions& opt) {
  if (!(t > s)) throw ConfigError("Phi maps need t > s");
  const int np = model.particle_dim(), nf = model.field_dim();
  if (x.size() != np || y.size() != np || z.size() != np)
    throw ConfigError("particle coordinates must have length 3n");
  if (X.size() != nf || Y.size() != nf || Z.size() != nf)
    throw ConfigError("field coordinates must have length 4N");
  const double rho = t - s;
  PhiMapPoint p;
  p.t = t;
  p.s = s;
  p.x = x, p.y = y, p.z = z, p.X = X, p.Y = Y, p.Z = Z;
  const PhiValues v = evaluate_phi(model, rho, x, y, z, X, Y, Z, opt.sigma_nodes);
  p.phi = v.phi;
  p.phi1 = v.phi1;
  if (!p.phi.allFinite() || !p.phi1.allFinite())
    throw InvariantViolation("Phi maps produced non-finite values");
  p.fd_step = opt.fd_step;
  if (opt.jacobian) {
    const int d = np + nf;
    MatX Jm(d, d);
    for (int col = 0; col < d; ++col) {
      VecX zp = z, zm = z, Zp = Z, Zm = Z;
      double h;
      if (col < np) {
        h = opt.fd_step * std::max(1.0, std::abs(z[col]));
        zp[col] += h;
        zm[col] -= h;
      } else {
        h = opt.fd_step * std::max(1.0, std::abs(Z[col - np]));
        Zp[col - np] += h;
        Zm[col - np] -= h;
      }
      const PhiValues a = evaluate_phi(model, rho, x, y, zp, X, Y, Zp, opt.sigma_nodes);
      const PhiValues b = evaluate_phi(model, rho, x, y, zm, X, Y, Zm, opt.sigma_nodes);
      Jm.col(col).head(np) = (a.phi - b.phi) / (2 * h);
      Jm.col(col).tail(nf) = (a.phi1 - b.phi1) / (2 * h);
    }
    p.jacobian_det = d == 0 ? 1.0 : Jm.partialPivLu().determinant();
  }
  return p;
}

PhiIdentity phi_identity(const Model& model, const PhiMapPoint& p) {
  const double rho = p.t - p.s;
  const double lhs = segment_action(model, p.t, p.s, p.z, p.y, p.Z, p.Y) -
                     segment_action(model, p.t, p.s, p.z, p.x, p.Z, p.X);
  double rhs = 0;
  for (int j = 0; j < model.n(); ++j)
    rhs += model.mass(j) * (p.x - p.y).segment<3>(3 * j).dot(p.phi.segment<3>(3 * j));
  rhs /= rho;
  if (model.field_dim() > 0) rhs += (p.X - p.Y).dot(p.phi1) / (rho * model.volume());
  return {lhs, rhs};
}

// ---------------------------------------------------------------- rho*

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_key(std::initializer_list<long long> parts) {
  std::uint64_t h = 0x2545f4914f6cdd1dULL;
  for (long long p : parts) h = splitmix64(h ^ static_cast<std::uint64_t>(p));
  return h;
}

}  // namespace

PhiSample draw_phi_sample(const Model& model, int sample, const RhoStarOptions& opt) {
  const int np = model.particle_dim(), nf = model.field_dim();
  const auto& L = model.config().L;
  PhiSample out;
  VecX* part[3] = {&out.x, &out.y, &out.z};
  VecX* fld[3] = {&out.X, &out.Y, &out.Z};
  for (int role = 0; role < 3; ++role) {
    part[role]->resize(np);
    for (int q = 0; q < np; ++q) {
      const int j = q / 3, m = q % 3;
      std::mt19937_64 rng(stream_key({static_cast<long long>(opt.seed), sample, role, 0, j, m}));
      std::uniform_real_distribution<double> u(-L[m] / 2, L[m] / 2);
      (*part[role])[q] = u(rng);
    }
    fld[role]->resize(nf);
    for (int v = 0; v < nf; ++v) {
      const FieldIndex fi = FieldVector::unflat(v);
      const Vec3i s = model.lambda3().lambda_prime[fi.k].s;
      std::mt19937_64 rng(stream_key(
          {static_cast<long long>(opt.seed), sample, role + 3, fi.l, s[0], s[1], s[2], fi.i}));
      const double ell = std::sqrt(model.config().hbar * model.volume() / model.omega()[v]);
      std::normal_distribution<double> g(0.0, opt.field_scale * ell);
      (*fld[role])[v] = g(rng);
    }
  }
  return out;
}

double sampled_min_det(const Model& model, double rho, const RhoStarOptions& opt,
                       std::vector<Certificate>* certs) {
  std::vector<double> det(opt.samples);
  PhiOptions po;
  po.sigma_nodes = opt.sigma_nodes;
  parallel_for(opt.samples, opt.jobs, [&](long i) {
    const PhiSample p = draw_phi_sample(model, static_cast<int>(i), opt);
    det[i] = phi_maps(model, rho, 0.0, p.x, p.y, p.z, p.X, p.Y, p.Z, po).jacobian_det;
  });
  if (certs) {
    certs->clear();
    for (int i = 0; i < opt.samples; ++i) certs->push_back({i, det[i]});
  }
  return *std::min_element(det.begin(), det.end());
}

RhoStarResult rho_star_search(const Model& model, const RhoStarOptions& opt) {
  if (opt.samples < 1 || !(opt.ceiling > opt.floor) || !(opt.floor > 0))
    throw ConfigError("rho* search needs samples >= 1 and 0 < floor < ceiling");
  RhoStarResult r;
  r.min_det = sampled_min_det(model, opt.ceiling, opt, &r.certificates);
  r.evaluations = 1;
  if (r.min_det >= 0.5) {
    r.rho_star = opt.ceiling;
    r.at_ceiling = true;
    return r;
  }
  double lo = opt.floor, hi = opt.ceiling;
  std::vector<Certificate> lo_certs;
  double lo_min = sampled_min_det(model, lo, opt, &lo_certs);
  ++r.evaluations;
  if (lo_min < 0.5) {
    r.rho_star = lo;
    r.min_det = lo_min;
    r.certificates = lo_certs;
    return r;
  }
  for (int it = 0; it < opt.iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    std::vector<Certificate> c;
    const double m = sampled_min_det(model, mid, opt, &c);
    ++r.evaluations;
    if (m >= 0.5) {
      lo = mid;
      lo_min = m;
      lo_certs = std::move(c);
    } else {
      hi = mid;
    }
  }
  r.rho_star = lo;
  r.min_det = lo_min;
  r.certificates = lo_certs;
  return r;
}

// ---------------------------------------------------------------- G_eps

cplx g_epsilon_mode_factor(double eps) {
  const cplx i1 = regularized_fresnel(1.0, eps);
  return i1 * i1 / (I * kPi);
}

cplx g_epsilon_factor(const Model& model, double eps) {
  const int n1 = model.lambda1().N();
  if (n1 == 0) return 1.0;
  return std::pow(g_epsilon_mode_factor(eps), n1);
}

GaussianState g_epsilon_step(const Model& model, const GaussianState& f, double t, double s,
                             double eps) {
  GaussianState u = fundamental_step(model, f, t, s);
  if (t > s) u.gamma += std::log(g_epsilon_factor(model, eps));
  return u;
}

StateVector g_epsilon_step(GalerkinStepper& stepper, const StateVector& f, double t, double s,
                           double eps) {
  StateVector u = fundamental_step(stepper, f, t, s);
  if (t > s) u.c *= g_epsilon_factor(stepper.model(), eps);
  return u;
}

GEquivalence g_equivalence(const Model& model, const GaussianState& f, double t, double s,
                           const std::vector<double>& eps) {
  check_halving(eps);
  const GaussianState Cf = fundamental_step(model, f, t, s);
  const double nrm = Cf.norm();
  GEquivalence out;
  std::vector<cplx> factors;
  for (double e : eps) {
    const cplx p = g_epsilon_factor(model, e);
    factors.push_back(p);
    const GaussianState G = g_epsilon_step(model, f, t, s, e);
    out.rows.push_back({e, p.real(), p.imag(), distance(G, Cf) / nrm});
  }
  const cplx p0 = richardson<cplx>(factors, 2.0, 2.0, 2.0);
  GaussianState G = Cf;
  G.gamma += std::log(p0);
  out.extrapolated_distance = distance(G, Cf) / nrm;
  return out;
}

// ---------------------------------------------------------------- studies

namespace {

// gamma difference with the log branch unwrapped
cplx gamma_diff(cplx a, cplx b) {
  cplx d = a - b;
  return {d.real(), std::remainder(d.imag(), 2 * kPi)};
}

GaussianState fd_derivative(const Model& model, const GaussianState& f, double rho, double h,
                            bool fourth) {
  auto at = [&](double r) { return fundamental_step(model, f, r, 0.0); };
  const GaussianState u0 = at(rho);
  GaussianState d = u0;
  if (!fourth) {
    const GaussianState p = at(rho + h), m = at(rho - h);
    d.alpha = (p.alpha - m.alpha) / (2 * h);
    d.beta = (p.beta - m.beta) / (2 * h);
    d.gamma = (gamma_diff(p.gamma, u0.gamma) - gamma_diff(m.gamma, u0.gamma)) / (2 * h);
  } else {
    const GaussianState p2 = at(rho + 2 * h), p1 = at(rho + h), m1 = at(rho - h),
                        m2 = at(rho - 2 * h);
    d.alpha = (-p2.alpha + 8.0 * p1.alpha - 8.0 * m1.alpha + m2.alpha) / (12 * h);
    d.beta = (-p2.beta + 8.0 * p1.beta - 8.0 * m1.beta + m2.beta) / (12 * h);
    d.gamma = (-gamma_diff(p2.gamma, u0.gamma) + 8.0 * gamma_diff(p1.gamma, u0.gamma) -
               8.0 * gamma_diff(m1.gamma, u0.gamma) + gamma_diff(m2.gamma, u0.gamma)) /
              (12 * h);
  }
  return d;
}

}  // namespace

ResidualStudy residual_study(const Model& model, const GaussianState& f,
                             const std::vector<double>& rhos) {
  require_analytic_valid(model);
  ResidualStudy out;
  std::vector<double> xs, ys;
  for (double rho : rhos) {
    if (!(rho > 0)) throw ConfigError("residual study needs positive steps");
    const double h = 1e-3 * rho;
    const GaussianState u = fundamental_step(model, f, rho, 0.0);
    const ResidualTerms r2 = quadratic_residual(model, u, fd_derivative(model, f, rho, h, false));
    const ResidualTerms r4 = quadratic_residual(model, u, fd_derivative(model, f, rho, h, true));
    out.rows.push_back({rho, r2.residual, r4.residual, r2.norm});
    xs.push_back(rho);
    ys.push_back(r2.residual);
  }
  out.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
  // monotone towards zero as rho decreases
  std::vector<size_t> order(rhos.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return rhos[a] > rhos[b]; });
  out.monotone = true;
  for (size_t i = 1; i < order.size(); ++i)
    if (!(ys[order[i]] < ys[order[i - 1]])) out.monotone = false;
  return out;
}

namespace {
void finish_convergence(ConvergenceStudy& s) {
  std::vector<double> xs, ys;
  s.monotone = true;
  for (size_t i = 0; i < s.rows.size(); ++i) {
    xs.push_back(s.rows[i].mesh);
    ys.push_back(s.rows[i].error);
    if (i > 0 && !(s.rows[i].error < s.rows[i - 1].error)) s.monotone = false;
  }
  s.order = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
}
}  // namespace

ConvergenceStudy convergence_study(const Model& model, const GaussianState& f, double T,
                                   const std::vector<int>& steps) {
  ConvergenceStudy out;
  const double n0 = f.norm();
  for (int n : steps) {
    const GaussianState u = compose(model, f, Subdivision::uniform(T, n));
    out.rows.push_back({n, T / n, error_against_exact(model, f, T, u), u.norm() / n0});
  }
  finish_convergence(out);
  return out;
}

ConvergenceStudy convergence_study(GalerkinStepper& stepper, const StateVector& f, double T,
                                   const std::vector<int>& steps, const StateVector& reference) {
  ConvergenceStudy out;
  const double n0 = f.norm();
  for (int n : steps) {
    const StateVector u = compose(stepper, f, Subdivision::uniform(T, n));
    out.rows.push_back({n, T / n, (u.c - reference.c).norm() / reference.norm(), u.norm() / n0});
  }
  finish_convergence(out);
  return out;
}

double fit_growth(const std::vector<ConvergenceRow>& rows, double T) {
  if (!(T > 0)) throw ConfigError("growth fit needs T > 0");
  double K = 0;
  for (const auto& r : rows) K = std::max(K, std::log(r.norm_ratio) / T);
  return K;
}

}  // namespace fmqed
