#include "fmqed/field.hpp"

#include <ostream>

#include "fmqed/errors.hpp"
#include "fmqed/io.hpp"

namespace fmqed {

FieldVector::FieldVector(int N, const VecX& v) : values(v) {
  if (v.size() != 4 * N) throw ConfigError("field vector length must be 4N");
}

void write_field_csv(std::ostream& os, const FieldVector& a, const ModeSet& modes) {
  CsvTable t({"flat", "l", "k_index", "i", "s1", "s2", "s3", "value"});
  for (int f = 0; f < a.size(); ++f) {
    FieldIndex id = FieldVector::unflat(f);
    const Vec3i& s = modes.lambda_prime.at(id.k).s;
    t.row() << f << id.l << id.k << id.i << s[0] << s[1] << s[2] << a.values[f];
  }
  t.write(os);
}

FullCoefficients extend_parity(const FieldVector& a, const ModeSet& modes) {
  if (a.N() != modes.N()) throw ConfigError("field vector does not match mode set");
  const int N = modes.N();
  FullCoefficients full(2 * N);
  for (int k = 0; k < N; ++k)
    for (int l = 1; l <= 2; ++l) {
      full[k][l - 1][0] = a(l, k, 1);
      full[k][l - 1][1] = a(l, k, 2);
      full[k + N][l - 1][0] = -a(l, k, 1);
      full[k + N][l - 1][1] = a(l, k, 2);
    }
  return full;
}

MollifierPair mollifiers_from(const SimulationConfig& config) {
  MollifierPair m;
  m.sigma = config.sigma_psi;
  m.width = config.g_width();
  return m;
}

VectorPotential::VectorPotential(const SimulationConfig& config, const ModeSet& field_modes,
                                 const ModeSet& sum_modes, const PolarizationFrame& field_frame)
    : kappa_(std::sqrt(8.0 * kPi) * config.c_light / config.volume()),
      nvar_(4 * field_modes.N()),
      moll_(mollifiers_from(config)) {
  for (const auto& w : sum_modes.lambda_prime) {
    auto [idx, sign] = field_modes.locate(w.s);
    if (idx < 0 || sign < 0)
      throw ConfigError("coupled mode set must be contained in the free-field mode set");
    const Polarization& p = field_frame.prime(idx);
    for (int l = 1; l <= 2; ++l)
      terms_.push_back({FieldVector::flat(l, idx, 1), FieldVector::flat(l, idx, 2), w.k, p[l]});
  }
}

Vec3 reconstruct_A(const Vec3& x, const FieldVector& a, const ModeSet& modes,
                   const PolarizationFrame& frame, const SimulationConfig& config) {
  VectorPotential vp(config, modes, modes, frame);
  return vp.A<double>(x, a.values.data());
}

Vec3 reconstruct_tilde_A(const Vec3& x, const FieldVector& a, const ModeSet& modes,
                         const PolarizationFrame& frame, const SimulationConfig& config) {
  VectorPotential vp(config, modes, modes, frame);
  return vp.tilde_A<double>(x, a.values.data());
}

VecX field_frequencies(const ModeSet& modes, const SimulationConfig& config) {
  VecX w(4 * modes.N());
  for (int f = 0; f < w.size(); ++f)
    w[f] = config.c_light * modes.lambda_prime[FieldVector::unflat(f).k].norm();
  return w;
}

double potential_V2(const FieldVector& a, const ModeSet& modes, const SimulationConfig& config) {
  if (a.N() != modes.N()) throw ConfigError("field vector does not match mode set");
  return potential_V2<double>(a.values.data(), field_frequencies(modes, config), config);
}

}  // namespace fmqed
