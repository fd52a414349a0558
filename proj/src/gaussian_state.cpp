#include "fmqed/gaussian_state.hpp"

#include <cmath>

#include "fmqed/errors.hpp"
#include "fmqed/quadrature.hpp"

namespace fmqed {

namespace {
const cplx I(0.0, 1.0);
}

double GaussianState::log_norm() const {
  double acc = 0;
  for (int v = 0; v < size(); ++v) {
    const double a = alpha[v].real(), b = beta[v].real();
    if (!(a > 0)) throw InvariantViolation("Gaussian state lost decay (Re alpha <= 0)");
    acc += 0.5 * std::log(kPi / (2 * a)) + b * b / (2 * a);
  }
  return 0.5 * acc + gamma.real();
}

cplx GaussianState::value(const VecX& q) const {
  cplx e = gamma;
  for (int v = 0; v < size(); ++v) e += -alpha[v] * q[v] * q[v] + beta[v] * q[v];
  return std::exp(e);
}

std::vector<QuadraticVariable> quadratic_variables(const Model& model) {
  std::vector<QuadraticVariable> out;
  for (int j = 0; j < model.n(); ++j)
    for (int m = 0; m < 3; ++m) out.push_back({model.mass(j), 0.0});
  for (int v = 0; v < model.field_dim(); ++v) out.push_back({1.0 / model.volume(), model.omega()[v]});
  return out;
}

GaussianState make_gaussian(const Model& model, const VecX& center, const VecX& wavenumber,
                            double particle_width) {
  const auto vars = quadratic_variables(model);
  const int d = static_cast<int>(vars.size());
  if (center.size() != d || wavenumber.size() != d)
    throw ConfigError("Gaussian centre and wavenumber need one entry per coordinate");
  GaussianState g;
  g.alpha.resize(d);
  g.beta.resize(d);
  for (int v = 0; v < d; ++v) {
    double a;
    if (vars[v].omega > 0)
      a = vars[v].mass * vars[v].omega / (2 * model.config().hbar);
    else
      a = 1.0 / (4 * particle_width * particle_width);
    g.alpha[v] = a;
    g.beta[v] = 2 * a * center[v] + I * wavenumber[v];
  }
  g.gamma = 0;
  g.normalize();
  return g;
}

GaussianState vacuum_gaussian(const Model& model, double particle_width) {
  const int d = model.particle_dim() + model.field_dim();
  return make_gaussian(model, VecX::Zero(d), VecX::Zero(d), particle_width);
}

void apply_kernel(GaussianState& f, int v, const QuadraticKernel& K) {
  const cplx ap = f.alpha[v] - I * K.u;
  if (!(ap.real() > 0)) throw InvariantViolation("Gaussian integral does not converge");
  const cplx b = f.beta[v];
  f.alpha[v] = -I * K.p + K.r * K.r / (4.0 * ap);
  f.beta[v] = I * K.r * b / (2.0 * ap);
  f.gamma += I * K.phi0 + b * b / (4.0 * ap) + std::log(K.A) + 0.5 * std::log(kPi / ap);
}

QuadraticKernel particle_step_kernel(double mass, double rho, double hbar) {
  if (!(rho > 0)) throw ConfigError("step length must be positive");
  QuadraticKernel K;
  K.p = K.u = mass / (2 * rho * hbar);
  K.r = -mass / (rho * hbar);
  K.phi0 = 0;
  K.A = std::sqrt(mass / (2 * kPi * hbar * rho)) * std::polar(1.0, -kPi / 4);
  return K;
}

QuadraticKernel field_step_kernel(double omega, double volume, double rho, double hbar) {
  if (!(rho > 0)) throw ConfigError("step length must be positive");
  QuadraticKernel K;
  const double M = 1.0 / volume;
  K.p = K.u = (M / (2 * rho) - rho * M * omega * omega / 6) / hbar;
  K.r = (-M / rho - rho * M * omega * omega / 6) / hbar;
  K.phi0 = rho * omega / 2;
  K.A = std::sqrt(M / (2 * kPi * hbar * rho)) * std::polar(1.0, -kPi / 4);
  return K;
}

QuadraticKernel mehler_kernel(double mass, double omega, double T, double hbar) {
  if (omega == 0) return particle_step_kernel(mass, T, hbar);
  const double sn = std::sin(omega * T), cs = std::cos(omega * T);
  if (!(sn > 0)) throw ConfigError("Mehler kernel needs 0 < omega T < pi");
  QuadraticKernel K;
  K.p = K.u = mass * omega * cs / (2 * hbar * sn);
  K.r = -mass * omega / (hbar * sn);
  K.phi0 = omega * T / 2;
  K.A = std::sqrt(mass * omega / (2 * kPi * hbar * sn)) * std::polar(1.0, -kPi / 4);
  return K;
}

namespace {
cplx log_inner_1d(cplx af, cplx bf, cplx ag, cplx bg) {
  const cplx A = std::conj(af) + ag, B = std::conj(bf) + bg;
  return 0.5 * std::log(kPi / A) + B * B / (4.0 * A);
}
}  // namespace

cplx inner(const GaussianState& f, const GaussianState& g) {
  if (f.size() != g.size()) throw ConfigError("Gaussian states of different size");
  cplx acc = std::conj(f.gamma) + g.gamma;
  for (int v = 0; v < f.size(); ++v) acc += log_inner_1d(f.alpha[v], f.beta[v], g.alpha[v], g.beta[v]);
  return std::exp(acc);
}

double distance(const GaussianState& f, const GaussianState& g) {
  const double ff = std::exp(2 * f.log_norm()), gg = std::exp(2 * g.log_norm());
  return std::sqrt(std::max(0.0, ff + gg - 2 * inner(f, g).real()));
}

VecXc hermite_coefficients(const GaussianState& f, int v, double ell, int nmax, int nodes) {
  const QuadRule& gh = gauss_hermite(nodes);
  VecXc c = VecXc::Zero(nmax + 1);
  std::vector<double> h(nmax + 1);
  for (int i = 0; i < nodes; ++i) {
    const double u = gh.x[i];
    const double a = ell * u;
    const cplx val = std::exp(-f.alpha[v] * a * a + f.beta[v] * a);
    hermite_functions(u, nmax, h.data());
    for (int n = 0; n <= nmax; ++n) c[n] += gh.w_scaled[i] * h[n] * val;
  }
  return c * std::sqrt(ell);
}

double error_against_exact(const Model& model, const GaussianState& f, double T,
                           const GaussianState& g, int nmax) {
  const auto vars = quadratic_variables(model);
  const double hbar = model.config().hbar;
  if (f.size() != static_cast<int>(vars.size()) || g.size() != f.size())
    throw ConfigError("state does not match the model");
  // log of per-variable inner products, gammas added at the end
  cplx ee = 0, gg = 0, eg = 0;
  cplx exact_gamma = f.gamma;
  for (int v = 0; v < f.size(); ++v) {
    if (vars[v].omega == 0) {
      GaussianState e;
      e.alpha = VecXc::Constant(1, f.alpha[v]);
      e.beta = VecXc::Constant(1, f.beta[v]);
      e.gamma = 0;
      apply_kernel(e, 0, particle_step_kernel(vars[v].mass, T, hbar));
      exact_gamma += e.gamma;
      ee += log_inner_1d(e.alpha[0], e.beta[0], e.alpha[0], e.beta[0]);
      gg += log_inner_1d(g.alpha[v], g.beta[v], g.alpha[v], g.beta[v]);
      eg += log_inner_1d(e.alpha[0], e.beta[0], g.alpha[v], g.beta[v]);
    } else {
      const double ell = std::sqrt(hbar / (vars[v].mass * vars[v].omega));
      VecXc cf = hermite_coefficients(f, v, ell, nmax);
      const VecXc cg = hermite_coefficients(g, v, ell, nmax);
      for (int n = 0; n <= nmax; ++n) cf[n] *= std::polar(1.0, -vars[v].omega * n * T);
      ee += std::log(cf.squaredNorm());
      gg += std::log(cg.squaredNorm());
      eg += std::log(cf.dot(cg));
    }
  }
  const double nee = std::exp((ee + 2 * exact_gamma.real()).real());
  const double ngg = std::exp((gg + 2 * g.gamma.real()).real());
  const cplx neg = std::exp(eg + std::conj(exact_gamma) + g.gamma);
  return std::sqrt(std::max(0.0, nee + ngg - 2 * neg.real())) / std::sqrt(nee);
}

ResidualTerms quadratic_residual(const Model& model, const GaussianState& u,
                                 const GaussianState& du) {
  const auto vars = quadratic_variables(model);
  const double hbar = model.config().hbar;
  cplx mean_total = I * hbar * du.gamma;
  double var_total = 0;
  for (int v = 0; v < u.size(); ++v) {
    const double M = vars[v].mass, w = vars[v].omega;
    const cplx a = u.alpha[v], b = u.beta[v];
    const double kin = hbar * hbar / (2 * M);
    const cplx c2 = -I * hbar * du.alpha[v] + kin * 4.0 * a * a - M * w * w / 2;
    const cplx c1 = I * hbar * du.beta[v] - kin * 4.0 * a * b;
    mean_total += kin * (b * b - 2.0 * a) + hbar * w / 2;
    const double ar = a.real(), br = b.real();
    const double m = br / (2 * ar), s2 = 1.0 / (4 * ar);
    mean_total += c2 * (m * m + s2) + c1 * m;
    var_total += std::norm((2.0 * c2 * m + c1)) * s2 + 2 * std::norm(c2) * s2 * s2;
  }
  const double nrm = u.norm();
  return {nrm * std::sqrt(std::norm(mean_total) + var_total), nrm};
}

}  // namespace fmqed
