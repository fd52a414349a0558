#ifndef FMQED_ACTION_HPP
#define FMQED_ACTION_HPP

#include <functional>
#include <vector>

#include "fmqed/model.hpp"
#include "fmqed/quadrature.hpp"

namespace fmqed {

class Subdivision {
 public:
  explicit Subdivision(std::vector<double> times);
  static Subdivision uniform(double T, int steps);

  const std::vector<double>& times() const { return times_; }
  int steps() const { return static_cast<int>(times_.size()) - 1; }
  double mesh() const;
  double start() const { return times_.front(); }
  double end() const { return times_.back(); }

 private:
  std::vector<double> times_;
};

// Piecewise-linear path through particle (3n) and field (4N) vertices at the
// subdivision times. Optional scalar offsets xi (2 N_1 per segment).
struct BrokenPath {
  Subdivision subdivision;
  std::vector<VecX> x;
  std::vector<VecX> X;
  std::vector<VecX> xi;

  void validate() const;
  // (particle, field) point at time tau
  std::pair<VecX, VecX> at(double tau) const;
};

// Pieces of the straight-segment action; total() is the sum.
struct SegmentTerms {
  double kinetic = 0;          // sum_j m_j |x_j - y_j|^2 / (2 (t - s))
  double coulomb = 0;          // -(t - s) int V1
  double gauge = 0;            // (1/c) sum_j e_j (x_j - y_j) . int tildeA
  double field_kinetic = 0;    // |X - Y|^2 / (2 |V| (t - s))
  double field_potential = 0;  // -(t - s) int V2
  double total() const { return kinetic + coulomb + gauge + field_kinetic + field_potential; }
};

AdaptiveOptions action_quadrature();

// x, X: endpoint at time t; y, Y: endpoint at time s.
SegmentTerms segment_action_terms(const Model& model, double t, double s, const VecX& x,
                                  const VecX& y, const VecX& X, const VecX& Y);
double segment_action(const Model& model, double t, double s, const VecX& x, const VecX& y,
                      const VecX& X, const VecX& Y);

double broken_action(const Model& model, const BrokenPath& path);

struct IdentityCheck {
  double lhs;
  double rhs;
};
// Eliminating the scalar potential through |k|^2 phi = 4 pi rho.
IdentityCheck constraint_identity_check(const std::vector<Vec3>& x,
                                        const std::vector<double>& charges, const Vec3& k);

// Action of the Lagrangian that still contains the scalar potential, along
// phi_k(theta) = xi_k + 4 pi rho_k(q(theta)) / |k|^2 for k in the Coulomb set.
// xi holds (xi^(1), xi^(2)) per halved mode; the integrand is evaluated
// directly over the full set using the parity relations.
double phi_path_action(const Model& model, double t, double s, const VecX& x, const VecX& y,
                       const VecX& X, const VecX& Y, const VecX& xi);
// closed form: segment_action + (t - s)/(4 pi |V|) sum |k|^2 |xi_k|^2
double phi_path_action_closed(const Model& model, double t, double s, const VecX& x,
                              const VecX& y, const VecX& X, const VecX& Y, const VecX& xi);

using ExternalVector = std::function<Vec3(double, const Vec3&)>;
using ExternalScalar = std::function<double(double, const Vec3&)>;
// Additive contribution of external potentials along the straight segment.
double external_field_terms(const Model& model, double t, double s, const VecX& x,
                            const VecX& y, const ExternalVector& A_ex,
                            const ExternalScalar& phi_ex);

}  // namespace fmqed

#endif
