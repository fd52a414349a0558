#include "fmqed/lattice.hpp"

#include <cmath>
#include <ostream>

#include "fmqed/errors.hpp"
#include "fmqed/io.hpp"

namespace fmqed {

namespace {
std::array<int, 3> key(const Vec3i& s) { return {s[0], s[1], s[2]}; }
}  // namespace

WaveVector make_wave_vector(const Vec3i& s, const std::array<double, 3>& L) {
  WaveVector w;
  w.s = s;
  for (int i = 0; i < 3; ++i) w.k[i] = 2.0 * kPi * s[i] / L[i];
  return w;
}

bool lex_positive(const Vec3i& s) {
  for (int i = 0; i < 3; ++i)
    if (s[i] != 0) return s[i] > 0;
  return false;
}

std::pair<int, int> ModeSet::locate(const Vec3i& s) const {
  auto it = index_.find(key(s));
  if (it != index_.end()) return {it->second, +1};
  it = index_.find(key(Vec3i(-s)));
  if (it != index_.end()) return {it->second, -1};
  return {-1, 0};
}

bool ModeSet::contains_prime(const Vec3i& s) const { return index_.count(key(s)) > 0; }

ModeSet mode_set_from(const std::vector<Vec3i>& prime, const std::array<double, 3>& L,
                      int which) {
  ModeSet m;
  m.which = which;
  for (const auto& s : prime) {
    if (!lex_positive(s)) throw ConfigError("halved mode set entries must be lexicographically positive");
    if (m.index_.count(key(s))) throw ConfigError("duplicate mode in halved set");
    m.index_[key(s)] = static_cast<int>(m.lambda_prime.size());
    m.lambda_prime.push_back(make_wave_vector(s, L));
  }
  m.lambda = m.lambda_prime;
  for (const auto& w : m.lambda_prime) m.lambda.push_back(-w);
  return m;
}

ModeSet build_mode_set(const SimulationConfig& config, int which) {
  if (which < 1 || which > 3) throw ConfigError("cutoff index must be 1, 2 or 3");
  const int M = config.M[which - 1];
  std::vector<Vec3i> prime;
  for (int a = -M; a <= M; ++a)
    for (int b = -M; b <= M; ++b)
      for (int c = -M; c <= M; ++c) {
        Vec3i s(a, b, c);
        if (!lex_positive(s)) continue;
        if (!config.mode_select.empty()) {
          bool keep = false;
          for (const auto& t : config.mode_select) keep = keep || t == s;
          if (!keep) continue;
        }
        prime.push_back(s);
      }
  return mode_set_from(prime, config.L, which);
}

Polarization polarization_for(const Vec3& k) {
  const double kn = k.norm();
  if (!(kn > 0)) throw ConfigError("polarization requested for k = 0");
  const Vec3 kh = k / kn;
  Vec3 seed(0, 0, 1);
  if (kh.cross(seed).norm() < 1e-8) seed = Vec3(0, 1, 0);
  Vec3 e2 = seed - seed.dot(kh) * kh;
  e2.normalize();
  Vec3 e1 = e2.cross(kh);
  e1.normalize();
  return {e1, e2};
}

PolarizationFrame build_polarization(const ModeSet& modes) {
  std::vector<Polarization> p;
  p.reserve(modes.lambda_prime.size());
  for (const auto& w : modes.lambda_prime) p.push_back(polarization_for(w.k));
  return PolarizationFrame(std::move(p));
}

Polarization PolarizationFrame::at(const ModeSet& modes, const Vec3i& s) const {
  auto [idx, sign] = modes.locate(s);
  if (idx < 0) throw ConfigError("wave vector not in mode set");
  const Polarization& p = prime_.at(idx);
  if (sign > 0) return p;
  return {Vec3(-p.e1), Vec3(-p.e2)};
}

void write_modes_csv(std::ostream& os, const ModeSet& modes, const PolarizationFrame& frame) {
  CsvTable t({"s1", "s2", "s3", "k1", "k2", "k3", "e1x", "e1y", "e1z", "e2x", "e2y", "e2z",
              "half"});
  for (const auto& w : modes.lambda) {
    Polarization p = frame.at(modes, w.s);
    t.row() << w.s[0] << w.s[1] << w.s[2] << w.k[0] << w.k[1] << w.k[2] << p.e1[0] << p.e1[1]
            << p.e1[2] << p.e2[0] << p.e2[1] << p.e2[2] << (modes.contains_prime(w.s) ? 1 : 0);
  }
  t.write(os);
}

}  // namespace fmqed
