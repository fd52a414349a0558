#ifndef FMQED_GALERKIN_HPP
#define FMQED_GALERKIN_HPP

#include <map>
#include <memory>
#include <vector>

#include "fmqed/fock.hpp"
#include "fmqed/model.hpp"

namespace fmqed {

struct GalerkinOptions {
  int P = 3;                  // sector harmonics |j| <= P
  int cap = 3;                // occupation cap per field coordinate
  Vec3 q0{0.0, 1.0, 0.0};     // sector base quasi-momentum
  int field_nodes = 16;       // Gauss-Hermite output nodes per field coordinate
  int field_rotated = 20;     // Gauss-Hermite nodes along the rotated field displacement
  int particle_rotated = 24;  // Gauss-Hermite nodes along the rotated particle displacement
  int theta_nodes = 12;       // Gauss-Legendre nodes along the segment
  int zeta_points = 0;        // output points per period; 0 means 4 P + 8
  // regularization levels for the displacement damping; empty means the
  // rotated integrals are evaluated directly
  std::vector<double> eps_levels;
  int jobs = 1;
};

// One-step matrices of the fundamental operator on a finite basis:
// field-only models (any number of modes) on Hermite levels, or one charged
// particle coupled to one mode on a plane-wave sector q0 + j k times Hermite
// levels. Kernel matrix elements are computed on contours rotated by pi/4,
// where the Fresnel factors become Gaussian weights.
class GalerkinStepper {
 public:
  GalerkinStepper(const Model& model, GalerkinOptions opt = {});

  const Model& model() const { return model_; }
  const GalerkinOptions& options() const { return opt_; }
  std::shared_ptr<const ProductBasis> basis() const { return basis_; }
  long dim() const { return basis_->dim(); }
  // one-step matrix for step rho, cached
  const MatXc& step_matrix(double rho);
  StateVector step(const StateVector& f, double rho);
  // number of kernel evaluations spent so far
  long long evaluations() const { return evaluations_; }

 private:
  MatXc assemble(double rho, double eps);
  MatXc assemble_field_only(double rho, double eps);
  MatXc assemble_coupled(double rho, double eps);

  const Model& model_;
  GalerkinOptions opt_;
  std::shared_ptr<const ProductBasis> basis_;
  std::map<double, MatXc> cache_;
  long long evaluations_ = 0;
};

// Per-coordinate one-step matrix <phi_n'| C | phi_n> of a free field coordinate.
MatXc field_step_matrix(double omega, double volume, double rho, double hbar, int cap,
                        int out_nodes, int rot_nodes, double eps = 0.0);

}  // namespace fmqed

#endif
