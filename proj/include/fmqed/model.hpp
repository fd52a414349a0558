#ifndef FMQED_MODEL_HPP
#define FMQED_MODEL_HPP

#include <memory>

#include "fmqed/config.hpp"
#include "fmqed/coulomb.hpp"
#include "fmqed/field.hpp"
#include "fmqed/lattice.hpp"

namespace fmqed {

// Everything derived from a configuration that the action, the Hamiltonian
// and the propagator share: the three mode sets, the polarization frame of
// the free-field set, the mollified potential and the Coulomb term.
class Model {
 public:
  explicit Model(const SimulationConfig& config);
  // explicit halved sets in place of the cutoff boxes
  Model(const SimulationConfig& config, const std::vector<Vec3i>& prime1,
        const std::vector<Vec3i>& prime2, const std::vector<Vec3i>& prime3);

  const SimulationConfig& config() const { return config_; }
  const ModeSet& lambda1() const { return lambda1_; }
  const ModeSet& lambda2() const { return lambda2_; }
  const ModeSet& lambda3() const { return lambda3_; }
  const PolarizationFrame& frame() const { return frame_; }
  const VectorPotential& potential() const { return *potential_; }
  const CoulombTerm& coulomb() const { return *coulomb_; }
  // c|k| per field coordinate of the free-field set
  const VecX& omega() const { return omega_; }

  int n() const { return config_.n_particles; }
  int particle_dim() const { return 3 * config_.n_particles; }
  int field_dim() const { return static_cast<int>(omega_.size()); }
  double volume() const { return config_.volume(); }
  double mass(int j) const { return config_.masses.at(j); }
  double charge(int j) const { return config_.charges.at(j); }
  // particles carry charge and the coupled set is nonempty
  bool coupled() const { return config_.coupled() && lambda2_.N() > 0; }

 private:
  void finish();

  SimulationConfig config_;
  ModeSet lambda1_, lambda2_, lambda3_;
  PolarizationFrame frame_;
  std::unique_ptr<VectorPotential> potential_;
  std::unique_ptr<CoulombTerm> coulomb_;
  VecX omega_;
};

}  // namespace fmqed

#endif
