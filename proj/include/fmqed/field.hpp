#ifndef FMQED_FIELD_HPP
#define FMQED_FIELD_HPP

#include <array>
#include <cmath>
#include <complex>
#include <iosfwd>
#include <limits>
#include <vector>

#include "fmqed/config.hpp"
#include "fmqed/lattice.hpp"
#include "fmqed/types.hpp"

namespace fmqed {

struct FieldIndex {
  int l;  // polarization 1 or 2
  int k;  // index into the halved mode set
  int i;  // 1: cosine part, 2: sine part
};

// Independent coordinates a_{lk}^{(i)}, k in the halved set, flattened
// k-major: flat = (4 k + 2 (l-1) + (i-1)).
class FieldVector {
 public:
  FieldVector() = default;
  explicit FieldVector(int N) : values(VecX::Zero(4 * N)) {}
  FieldVector(int N, const VecX& v);

  static int flat(int l, int k, int i) { return 4 * k + 2 * (l - 1) + (i - 1); }
  static FieldIndex unflat(int f) { return {(f / 2) % 2 + 1, f / 4, f % 2 + 1}; }

  int N() const { return static_cast<int>(values.size() / 4); }
  int size() const { return static_cast<int>(values.size()); }
  double& operator()(int l, int k, int i) { return values[flat(l, k, i)]; }
  double operator()(int l, int k, int i) const { return values[flat(l, k, i)]; }

  VecX values;
};

// flat,l,k_index,i,s1,s2,s3,value
void write_field_csv(std::ostream& os, const FieldVector& a, const ModeSet& modes);

// Coefficients over the full set: entry [idx in modes.lambda][l-1][i-1].
using FullCoefficients = std::vector<std::array<std::array<double, 2>, 2>>;
FullCoefficients extend_parity(const FieldVector& a, const ModeSet& modes);

struct MollifierPair {
  double sigma = 10.0;
  // infinite width means g == 1
  double width = std::numeric_limits<double>::infinity();

  template <typename S>
  S psi(const S& t) const {
    using std::tanh;
    return S(sigma) * tanh(t / sigma);
  }
  template <typename S>
  S dpsi(const S& t) const {
    using std::tanh;
    S th = tanh(t / sigma);
    return S(1.0) - th * th;
  }
  bool g_is_one() const { return std::isinf(width); }
  template <typename S>
  S g(const Vec3T<S>& x) const {
    using std::exp;
    if (g_is_one()) return S(1.0);
    return exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * width * width));
  }
  template <typename S>
  Vec3T<S> grad_g(const Vec3T<S>& x) const {
    if (g_is_one()) return Vec3T<S>::Zero();
    return x * (-g(x) / (width * width));
  }
};

MollifierPair mollifiers_from(const SimulationConfig& config);

// Vector potential built from coordinates indexed by `field_modes` (the free
// field set) and summed over `sum_modes` (the coupled set, contained in it).
class VectorPotential {
 public:
  struct Term {
    int var_cos;  // flat index of a^{(1)}_{lk}
    int var_sin;  // flat index of a^{(2)}_{lk}
    Vec3 k;
    Vec3 e;  // e_l(k)
  };

  VectorPotential(const SimulationConfig& config, const ModeSet& field_modes,
                  const ModeSet& sum_modes, const PolarizationFrame& field_frame);

  double prefactor() const { return kappa_; }
  const MollifierPair& mollifiers() const { return moll_; }
  const std::vector<Term>& terms() const { return terms_; }
  int field_size() const { return nvar_; }

  // Unmollified potential.
  template <typename S>
  Vec3T<S> A(const Vec3T<S>& x, const S* a) const {
    using std::cos;
    using std::sin;
    Vec3T<S> out = Vec3T<S>::Zero();
    for (const auto& t : terms_) {
      S ph = t.k[0] * x[0] + t.k[1] * x[1] + t.k[2] * x[2];
      S amp = a[t.var_cos] * cos(ph) + a[t.var_sin] * sin(ph);
      out += t.e.cast<S>() * amp;
    }
    return out * S(kappa_);
  }

  template <typename S>
  Vec3T<S> tilde_A(const Vec3T<S>& x, const S* a) const {
    using std::cos;
    using std::sin;
    Vec3T<S> out = Vec3T<S>::Zero();
    for (const auto& t : terms_) {
      S ph = t.k[0] * x[0] + t.k[1] * x[1] + t.k[2] * x[2];
      S amp = moll_.psi(a[t.var_cos]) * cos(ph) + moll_.psi(a[t.var_sin]) * sin(ph);
      out += t.e.cast<S>() * amp;
    }
    return out * (S(kappa_) * moll_.g(x));
  }

  // J(m, l) = d tildeA_l / d x_m
  template <typename S>
  Eigen::Matrix<S, 3, 3> grad_x_tilde_A(const Vec3T<S>& x, const S* a) const {
    using std::cos;
    using std::sin;
    Eigen::Matrix<S, 3, 3> J = Eigen::Matrix<S, 3, 3>::Zero();
    Vec3T<S> sum = Vec3T<S>::Zero();
    for (const auto& t : terms_) {
      S ph = t.k[0] * x[0] + t.k[1] * x[1] + t.k[2] * x[2];
      S p1 = moll_.psi(a[t.var_cos]), p2 = moll_.psi(a[t.var_sin]);
      S amp = p1 * cos(ph) + p2 * sin(ph);
      S damp = -p1 * sin(ph) + p2 * cos(ph);
      sum += t.e.cast<S>() * amp;
      J += t.k.cast<S>() * t.e.cast<S>().transpose() * damp;
    }
    S g = moll_.g(x);
    J = J * g + moll_.grad_g(x) * sum.transpose();
    return J * S(kappa_);
  }

  // D(m, v) = d tildeA_m / d a_v over all field coordinates
  template <typename S>
  Eigen::Matrix<S, 3, Eigen::Dynamic> grad_a_tilde_A(const Vec3T<S>& x, const S* a) const {
    using std::cos;
    using std::sin;
    Eigen::Matrix<S, 3, Eigen::Dynamic> D = Eigen::Matrix<S, 3, Eigen::Dynamic>::Zero(3, nvar_);
    S pre = S(kappa_) * moll_.g(x);
    for (const auto& t : terms_) {
      S ph = t.k[0] * x[0] + t.k[1] * x[1] + t.k[2] * x[2];
      D.col(t.var_cos) += t.e.cast<S>() * (pre * moll_.dpsi(a[t.var_cos]) * cos(ph));
      D.col(t.var_sin) += t.e.cast<S>() * (pre * moll_.dpsi(a[t.var_sin]) * sin(ph));
    }
    return D;
  }

 private:
  double kappa_ = 0;
  int nvar_ = 0;
  MollifierPair moll_;
  std::vector<Term> terms_;
};

// Free-function forms.
Vec3 reconstruct_A(const Vec3& x, const FieldVector& a, const ModeSet& modes,
                   const PolarizationFrame& frame, const SimulationConfig& config);
Vec3 reconstruct_tilde_A(const Vec3& x, const FieldVector& a, const ModeSet& modes,
                         const PolarizationFrame& frame, const SimulationConfig& config);

// Oscillator frequency c|k| of each coordinate.
VecX field_frequencies(const ModeSet& modes, const SimulationConfig& config);

template <typename S>
S potential_V2(const S* a, const VecX& omega, const SimulationConfig& config) {
  const double V = config.volume();
  S acc = S(0.0);
  for (int v = 0; v < omega.size(); ++v)
    acc += S(omega[v] * omega[v] / (2.0 * V)) * a[v] * a[v] - S(config.hbar * omega[v] / 2.0);
  return acc;
}

double potential_V2(const FieldVector& a, const ModeSet& modes, const SimulationConfig& config);

}  // namespace fmqed

#endif
