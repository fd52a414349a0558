#ifndef FMQED_PROPAGATOR_HPP
#define FMQED_PROPAGATOR_HPP

#include <cstdint>
#include <vector>

#include "fmqed/action.hpp"
#include "fmqed/fock.hpp"
#include "fmqed/galerkin.hpp"
#include "fmqed/gaussian_state.hpp"
#include "fmqed/model.hpp"

namespace fmqed {

// ---------------------------------------------------------------- Fresnel

// int exp(i a theta^2) d theta = sqrt(pi / a) exp(i pi / 4)
cplx fresnel_gaussian(double a);
// the same integral damped by exp(-(eps theta)^2), by panel quadrature
cplx regularized_fresnel(double a, double eps);

struct EpsExtrapolation {
  std::vector<double> eps;
  std::vector<cplx> values;
  cplx extrapolated;
};
// Richardson in eps (levels halving, even powers)
EpsExtrapolation fresnel_extrapolated(double a, const std::vector<double>& eps = {0.1, 0.05, 0.025});

// int over R^2 of exp(i rho |k|^2 |xi|^2 / (4 pi hbar |V|)) d xi
cplx xi_factor_oracle(double k2, double rho, double hbar, double volume);
// the same by regularized quadrature in the scaled variable, extrapolated
EpsExtrapolation xi_factor_quadrature(double k2, double rho, double hbar, double volume,
                                      const std::vector<double>& eps = {0.1, 0.05, 0.025, 0.0125});

// ---------------------------------------------------------------- backends

enum class BackendKind { AnalyticQuadratic, Galerkin };

struct StepBackend {
  BackendKind kind = BackendKind::AnalyticQuadratic;
  GalerkinOptions galerkin;
  // kernel evaluation budget for the galerkin backend
  long long budget = 4'000'000'000LL;
};

// Throws ConfigError when the model is not quadratic (charged particles with a
// nonempty coupled set, or pair Coulomb terms).
void require_analytic_valid(const Model& model);

// Fundamental operator C(t, s) on Gaussian states (analytic backend).
GaussianState fundamental_step(const Model& model, const GaussianState& f, double t, double s);
GaussianState compose(const Model& model, const GaussianState& f, const Subdivision& sub);

// Fundamental operator on basis coefficients (galerkin backend).
StateVector fundamental_step(GalerkinStepper& stepper, const StateVector& f, double t, double s);
StateVector compose(GalerkinStepper& stepper, const StateVector& f, const Subdivision& sub,
                    long long budget = 4'000'000'000LL);

// ---------------------------------------------------------------- Phi maps

struct PhiMapPoint {
  double t = 0, s = 0;
  VecX x, y, z, X, Y, Z;
  VecX phi;   // 3n: Phi^(j) stacked
  VecX phi1;  // 4N
  double jacobian_det = 1.0;
  double fd_step = 0;  // relative finite-difference step
};

struct PhiOptions {
  int sigma_nodes = 24;  // Gauss-Legendre nodes per sigma direction
  double fd_step = 1e-5;
  bool jacobian = true;
};

PhiMapPoint phi_maps(const Model& model, double t, double s, const VecX& x, const VecX& y,
                     const VecX& z, const VecX& X, const VecX& Y, const VecX& Z,
                     const PhiOptions& opt = {});

// S(t,s; z <- y, Z <- Y) - S(t,s; z <- x, Z <- X) against
// (1/rho) sum_j m_j (x - y)^(j) . Phi^(j) + (1/(rho |V|)) (X - Y) . Phi_1
struct PhiIdentity {
  double lhs;
  double rhs;
};
PhiIdentity phi_identity(const Model& model, const PhiMapPoint& p);

// ---------------------------------------------------------------- rho*

struct RhoStarOptions {
  int samples = 32;
  double ceiling = 1.0;
  double floor = 1e-6;
  int iterations = 30;
  std::uint64_t seed = 20240601;
  double field_scale = 2.0;  // field coordinates ~ N(0, (scale * length)^2)
  int sigma_nodes = 12;
  int jobs = 1;
};

struct Certificate {
  int sample;
  double det;
};

struct RhoStarResult {
  double rho_star = 0;
  bool at_ceiling = false;
  double min_det = 0;  // sampled minimum at rho_star
  std::vector<Certificate> certificates;
  int evaluations = 0;  // number of rho values probed
};

// Sampled point of the domain; coordinates are drawn from streams keyed by
// (seed, sample, role, variable identity), so a shared variable receives the
// same value whatever the surrounding mode sets are.
struct PhiSample {
  VecX x, y, z, X, Y, Z;
};
PhiSample draw_phi_sample(const Model& model, int sample, const RhoStarOptions& opt);
double sampled_min_det(const Model& model, double rho, const RhoStarOptions& opt,
                       std::vector<Certificate>* certs = nullptr);
RhoStarResult rho_star_search(const Model& model, const RhoStarOptions& opt = {});

// ---------------------------------------------------------------- G_eps

// Per-mode factor of the scalar-offset integration with damping chi(eps theta)
// on the scaled variable; tends to 1 as eps -> 0.
cplx g_epsilon_mode_factor(double eps);
cplx g_epsilon_factor(const Model& model, double eps);
GaussianState g_epsilon_step(const Model& model, const GaussianState& f, double t, double s,
                             double eps);
StateVector g_epsilon_step(GalerkinStepper& stepper, const StateVector& f, double t, double s,
                           double eps);

struct GEquivalenceRow {
  double eps;
  double factor_re, factor_im;
  double distance;  // || G_eps f - C f || / || C f ||
};
struct GEquivalence {
  std::vector<GEquivalenceRow> rows;
  double extrapolated_distance = 0;
};
GEquivalence g_equivalence(const Model& model, const GaussianState& f, double t, double s,
                           const std::vector<double>& eps = {0.1, 0.05, 0.025, 0.0125});

// ---------------------------------------------------------------- studies

struct ResidualRow {
  double rho;
  double residual;          // centered difference in t
  double residual_control;  // fourth-order difference in t
  double norm;
};
struct ResidualStudy {
  std::vector<ResidualRow> rows;
  double slope = 0;
  bool monotone = false;
};
ResidualStudy residual_study(const Model& model, const GaussianState& f,
                             const std::vector<double>& rhos);

struct ConvergenceRow {
  int steps;
  double mesh;
  double error;  // relative to the exact evolution
  double norm_ratio;
};
struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  double order = 0;
  bool monotone = false;
};
// analytic backend against the exact free evolution
ConvergenceStudy convergence_study(const Model& model, const GaussianState& f, double T,
                                   const std::vector<int>& steps);
// galerkin backend against reference_evolve of the assembled Hamiltonian
ConvergenceStudy convergence_study(GalerkinStepper& stepper, const StateVector& f, double T,
                                   const std::vector<int>& steps, const StateVector& reference);

// K with ||C_Delta f|| <= exp(K T) ||f|| over the rows, clipped at 0
double fit_growth(const std::vector<ConvergenceRow>& rows, double T);

}  // namespace fmqed

#endif
