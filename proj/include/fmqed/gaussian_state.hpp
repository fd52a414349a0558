#ifndef FMQED_GAUSSIAN_STATE_HPP
#define FMQED_GAUSSIAN_STATE_HPP

#include <vector>

#include "fmqed/model.hpp"
#include "fmqed/types.hpp"

namespace fmqed {

// exp(sum_v (-alpha_v q_v^2 + beta_v q_v) + gamma) over the 3n particle
// coordinates followed by the 4N field coordinates.
struct GaussianState {
  VecXc alpha;
  VecXc beta;
  cplx gamma = 0;

  int size() const { return static_cast<int>(alpha.size()); }
  double log_norm() const;
  double norm() const { return std::exp(log_norm()); }
  void normalize() { gamma -= log_norm(); }
  cplx value(const VecX& q) const;
};

// Per-variable data of the free quadratic Hamiltonian
// -(hbar^2/2M) d^2 + (M omega^2/2) q^2 - hbar omega/2.
struct QuadraticVariable {
  double mass;
  double omega;
};
std::vector<QuadraticVariable> quadratic_variables(const Model& model);

// Normalized product of ground-state widths (field) or width `particle_width`
// (particles), centred at `center` with mean momentum hbar * `wavenumber`.
GaussianState make_gaussian(const Model& model, const VecX& center, const VecX& wavenumber,
                            double particle_width = 1.0);
// Field ground state times particle packets.
GaussianState vacuum_gaussian(const Model& model, double particle_width = 1.0);

// Kernel A exp(i (p X^2 + r X Y + u Y^2) + i phi0) in one variable.
struct QuadraticKernel {
  cplx p, r, u;
  cplx phi0;
  cplx A;
};
// Applies one kernel to variable v (integrating over its input coordinate).
void apply_kernel(GaussianState& f, int v, const QuadraticKernel& K);

// One-step kernel of the straight-segment action for step rho.
QuadraticKernel particle_step_kernel(double mass, double rho, double hbar);
QuadraticKernel field_step_kernel(double omega, double volume, double rho, double hbar);
// Exact oscillator kernel (Mehler) with the zero-point energy removed.
QuadraticKernel mehler_kernel(double mass, double omega, double T, double hbar);

cplx inner(const GaussianState& f, const GaussianState& g);
double distance(const GaussianState& f, const GaussianState& g);

// Hermite coefficients <phi_n, f_v> of the one-variable factor (gamma excluded)
// for oscillator length ell.
VecXc hermite_coefficients(const GaussianState& f, int v, double ell, int nmax,
                           int nodes = 200);

// || f_exact(T) - g || / || f_exact(T) || where f_exact is the exact free
// evolution of f: particles by the free kernel, field variables by the
// oscillator spectrum in the Hermite basis.
double error_against_exact(const Model& model, const GaussianState& f, double T,
                           const GaussianState& g, int nmax = 80);

struct ResidualTerms {
  double residual;  // || (i hbar d/drho - H) u ||
  double norm;      // || u ||
};
// Residual of u(rho) given u and its rho-derivative parameters.
ResidualTerms quadratic_residual(const Model& model, const GaussianState& u,
                                 const GaussianState& du);

}  // namespace fmqed

#endif
