#ifndef FMQED_LATTICE_HPP
#define FMQED_LATTICE_HPP

#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "fmqed/config.hpp"
#include "fmqed/types.hpp"

namespace fmqed {

struct WaveVector {
  Vec3i s = Vec3i::Zero();
  Vec3 k = Vec3::Zero();

  double norm() const { return k.norm(); }
  WaveVector operator-() const { return {-s, -k}; }
};

WaveVector make_wave_vector(const Vec3i& s, const std::array<double, 3>& L);

// first nonzero component positive
bool lex_positive(const Vec3i& s);

struct ModeSet {
  int which = 3;  // cutoff index j in 1..3
  // lambda[i + N] == -lambda_prime[i]
  std::vector<WaveVector> lambda;
  std::vector<WaveVector> lambda_prime;

  int N() const { return static_cast<int>(lambda_prime.size()); }
  // index into lambda_prime of s or -s; sign is +1 when s itself is in the half
  std::pair<int, int> locate(const Vec3i& s) const;
  bool contains_prime(const Vec3i& s) const;

 private:
  friend ModeSet build_mode_set(const SimulationConfig&, int);
  friend ModeSet mode_set_from(const std::vector<Vec3i>&, const std::array<double, 3>&, int);
  std::map<std::array<int, 3>, int> index_;
};

ModeSet build_mode_set(const SimulationConfig& config, int which);
// explicit halved set (each entry lexicographically positive)
ModeSet mode_set_from(const std::vector<Vec3i>& prime, const std::array<double, 3>& L,
                      int which);

struct Polarization {
  Vec3 e1;
  Vec3 e2;
  const Vec3& operator[](int l) const { return l == 1 ? e1 : e2; }
};

// e_j(k) for the half set; e_j(-k) = -e_j(k) is applied on lookup
class PolarizationFrame {
 public:
  PolarizationFrame() = default;
  explicit PolarizationFrame(std::vector<Polarization> prime) : prime_(std::move(prime)) {}
  Polarization at(const ModeSet& modes, const Vec3i& s) const;
  const Polarization& prime(int i) const { return prime_.at(i); }
  size_t size() const { return prime_.size(); }

 private:
  std::vector<Polarization> prime_;
};

// Gram-Schmidt from the seed (0,0,1) (or (0,1,0) when k is nearly along z)
// gives e2; e1 = e2 x k/|k| so that (e1, e2, k/|k|) is right handed.
Polarization polarization_for(const Vec3& k);
PolarizationFrame build_polarization(const ModeSet& modes);

// s1,s2,s3,k1,k2,k3,e1x,e1y,e1z,e2x,e2y,e2z,half
void write_modes_csv(std::ostream& os, const ModeSet& modes, const PolarizationFrame& frame);

}  // namespace fmqed

#endif
