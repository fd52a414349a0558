#ifndef FMQED_FOCK_HPP
#define FMQED_FOCK_HPP

#include <iosfwd>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fmqed/model.hpp"
#include "fmqed/types.hpp"

namespace fmqed {

// Product of per-variable Hermite levels 0..cap. Variable 0 varies fastest.
class OscillatorBasis {
 public:
  OscillatorBasis() = default;
  OscillatorBasis(const VecX& omega, int cap, double volume, double hbar);
  static OscillatorBasis from_model(const Model& model, int cap);

  int variables() const { return static_cast<int>(omega_.size()); }
  int cap() const { return cap_; }
  long dim() const { return dim_; }
  long stride(int v) const { return stride_.at(v); }
  const VecX& omega() const { return omega_; }
  double volume() const { return volume_; }
  double hbar() const { return hbar_; }
  // oscillator length sqrt(hbar |V| / omega)
  double length(int v) const { return std::sqrt(hbar_ * volume_ / omega_[v]); }

  std::vector<int> occupations(long index) const;
  long index(const std::vector<int>& occ) const;
  int occupation(long index, int v) const { return static_cast<int>((index / stride_[v]) % (cap_ + 1)); }

 private:
  VecX omega_;
  int cap_ = 0;
  double volume_ = 1, hbar_ = 1;
  long dim_ = 1;
  std::vector<long> stride_;
};

// Sum of separable terms coef * g(x)^gpow * exp(i p.x).
struct ParticleFunction {
  struct Term {
    cplx coef;
    Vec3 p;
    int gpow;
  };
  std::vector<Term> terms;

  static ParticleFunction exponential(const Vec3& p, cplx coef = 1.0, int gpow = 0);
  static ParticleFunction cosine(const Vec3& k, double coef, int gpow);
  static ParticleFunction sine(const Vec3& k, double coef, int gpow);
  ParticleFunction operator*(const ParticleFunction& o) const;
  cplx operator()(const Vec3& x, double g_width) const;
};

enum class ParticleRepKind { PlaneWave, Grid };

// Single-particle basis on the box [-L/2, L/2)^3, tensored over n particles
// (particle 0 slowest).
class ParticleBasis {
 public:
  static ParticleBasis none();
  // momenta 2 pi m / L with |m_i| <= P
  static ParticleBasis plane_wave_cube(const SimulationConfig& config, int P);
  // quasi-momenta q0 + j k, |j| <= P
  static ParticleBasis sector(const SimulationConfig& config, const Vec3& q0, const Vec3& k, int P);
  static ParticleBasis plane_wave(const SimulationConfig& config, std::vector<Vec3> momenta);
  // odd number of points per axis
  static ParticleBasis grid(const SimulationConfig& config, int points);

  ParticleRepKind kind() const { return kind_; }
  int particles() const { return n_; }
  long single_dim() const;
  long dim() const;
  const std::vector<Vec3>& momenta() const { return momenta_; }
  int grid_points() const { return ng_; }
  Vec3 grid_point(long single_index) const;
  const std::array<double, 3>& box() const { return L_; }

  // single-particle matrices
  SpMat momentum(int m, double hbar) const;
  SpMat momentum_squared(double hbar) const;
  SpMat multiply(const ParticleFunction& f, double g_width) const;
  // embeds a single-particle matrix acting on particle j
  SpMat embed(const SpMat& single, int j) const;

 private:
  ParticleRepKind kind_ = ParticleRepKind::PlaneWave;
  int n_ = 0;
  std::array<double, 3> L_{1, 1, 1};
  std::vector<Vec3> momenta_;
  int ng_ = 0;
};

// particle (slow) x field (fast)
struct ProductBasis {
  ParticleBasis particle;
  OscillatorBasis field;
  long dim() const { return particle.dim() * field.dim(); }
  long index(long p, long f) const { return p * field.dim() + f; }
};

struct StateVector {
  std::shared_ptr<const ProductBasis> basis;
  VecXc c;
  double norm() const { return c.norm(); }
};

struct OperatorMatrix {
  std::shared_ptr<const ProductBasis> basis;
  SpMat m;
  bool hermitian = false;
  // max |A - A^dagger| entry
  double hermiticity_defect() const;
  VecXc apply(const VecXc& v) const { return m * v; }
};

SpMat kron(const SpMat& a, const SpMat& b);
SpMat identity(long n);

// Field operators on the oscillator basis alone.
std::pair<SpMat, SpMat> ladder_ops(const OscillatorBasis& basis, int variable);
// variable index from (l, k in halved set, i)
std::pair<SpMat, SpMat> ladder_ops(const OscillatorBasis& basis, const ModeSet& modes, int l,
                                   const Vec3i& s, int i);
// complex annihilator / creator for (l, k) with k anywhere in the full set
std::pair<SpMat, SpMat> complex_modes(const OscillatorBasis& basis, const ModeSet& modes, int l,
                                      const Vec3i& s);
// coordinate operator a_v = length (a + a^dagger)/sqrt 2, momentum -i hbar d/da_v
SpMat field_coordinate(const OscillatorBasis& basis, int variable);
SpMat field_momentum(const OscillatorBasis& basis, int variable);
// matrix of F(a_v) on one variable's levels, by Gauss-Hermite quadrature
MatX single_variable_function(const OscillatorBasis& basis, int variable,
                              const std::function<double(double)>& F, int nodes = 96);
SpMat embed_variable(const OscillatorBasis& basis, int variable, const MatX& single);

VecXc vacuum(const OscillatorBasis& basis);
// occupations of complex modes keyed by (l, s) with s in the full set
using PhotonOccupations = std::map<std::pair<int, std::array<int, 3>>, int>;
VecXc photon_state(const OscillatorBasis& basis, const ModeSet& modes,
                   const PhotonOccupations& occ);
// sum over the full set of hbar c|k| a^dagger_{lk} a_{lk}, built from the complex modes
SpMat h_rad(const OscillatorBasis& basis, const ModeSet& modes);
SpMat number_operator(const OscillatorBasis& basis, const ModeSet& modes);
// component m of sum over the full set of hbar k a^dagger_{lk} a_{lk}
SpMat field_momentum_total(const OscillatorBasis& basis, const ModeSet& modes, int m);

// Coordinate-space value of a field state at a (4N vector).
cplx field_wavefunction(const OscillatorBasis& basis, const VecXc& state, const VecX& a);
// Per-variable second-order differential oscillator operator projected on the
// levels by quadrature (8th-order finite differences), summed over variables.
SpMat h_rad_differential(const OscillatorBasis& basis, int nodes = 96, double step = 1e-2);

ProductBasis make_product_basis(const Model& model, const ParticleBasis& particle, int cap);
OperatorMatrix assemble_hamiltonian(const Model& model,
                                    std::shared_ptr<const ProductBasis> basis);

struct EvolveOptions {
  long dense_limit = 2048;
  int krylov_dim = 40;
  double tol = 1e-12;
};
StateVector reference_evolve(const OperatorMatrix& H, const StateVector& f, double t,
                             double hbar, const EvolveOptions& opt = {});

// eigenvalues of a hermitian operator, ascending
VecX spectrum(const OperatorMatrix& H);

void write_state_csv(std::ostream& os, const StateVector& s);
// value, multiplicity (eigenvalues grouped within tol)
void write_spectrum_csv(std::ostream& os, const VecX& eigenvalues, double tol = 1e-9);
nlohmann::json sparsity_stats(const SpMat& m);

}  // namespace fmqed

#endif
