#include "fmqed/fock.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "fmqed/errors.hpp"
#include "fmqed/io.hpp"
#include "fmqed/quadrature.hpp"

namespace fmqed {

using Trip = Eigen::Triplet<cplx>;

// ---------------------------------------------------------------- bases

OscillatorBasis::OscillatorBasis(const VecX& omega, int cap, double volume, double hbar)
    : omega_(omega), cap_(cap), volume_(volume), hbar_(hbar) {
  if (cap < 0) throw ConfigError("occupation cap must be non-negative");
  for (int v = 0; v < omega.size(); ++v)
    if (!(omega[v] > 0)) throw ConfigError("oscillator frequencies must be positive");
  dim_ = 1;
  for (int v = 0; v < omega.size(); ++v) {
    stride_.push_back(dim_);
    if (dim_ > 50'000'000 / (cap + 1)) throw ConfigError("oscillator basis too large for the caps");
    dim_ *= cap + 1;
  }
}

OscillatorBasis OscillatorBasis::from_model(const Model& model, int cap) {
  return OscillatorBasis(model.omega(), cap, model.volume(), model.config().hbar);
}

std::vector<int> OscillatorBasis::occupations(long index) const {
  std::vector<int> occ(variables());
  for (int v = 0; v < variables(); ++v) occ[v] = occupation(index, v);
  return occ;
}

long OscillatorBasis::index(const std::vector<int>& occ) const {
  if (static_cast<int>(occ.size()) != variables()) throw ConfigError("occupation length mismatch");
  long idx = 0;
  for (int v = 0; v < variables(); ++v) {
    if (occ[v] < 0 || occ[v] > cap_) throw ConfigError("occupation outside the cap");
    idx += occ[v] * stride_[v];
  }
  return idx;
}

ParticleFunction ParticleFunction::exponential(const Vec3& p, cplx coef, int gpow) {
  return {{{coef, p, gpow}}};
}

ParticleFunction ParticleFunction::cosine(const Vec3& k, double coef, int gpow) {
  return {{{0.5 * coef, k, gpow}, {0.5 * coef, -k, gpow}}};
}

ParticleFunction ParticleFunction::sine(const Vec3& k, double coef, int gpow) {
  const cplx h = cplx(0, -0.5) * coef;
  return {{{h, k, gpow}, {-h, -k, gpow}}};
}

ParticleFunction ParticleFunction::operator*(const ParticleFunction& o) const {
  ParticleFunction r;
  for (const auto& a : terms)
    for (const auto& b : o.terms) r.terms.push_back({a.coef * b.coef, a.p + b.p, a.gpow + b.gpow});
  return r;
}

cplx ParticleFunction::operator()(const Vec3& x, double g_width) const {
  cplx acc = 0;
  const double g = std::isinf(g_width) ? 1.0 : std::exp(-x.squaredNorm() / (2 * g_width * g_width));
  for (const auto& t : terms) acc += t.coef * std::pow(g, t.gpow) * std::polar(1.0, t.p.dot(x));
  return acc;
}

ParticleBasis ParticleBasis::none() {
  ParticleBasis b;
  b.n_ = 0;
  return b;
}

ParticleBasis ParticleBasis::plane_wave(const SimulationConfig& config, std::vector<Vec3> momenta) {
  if (momenta.empty()) throw ConfigError("plane-wave basis needs at least one momentum");
  ParticleBasis b;
  b.kind_ = ParticleRepKind::PlaneWave;
  b.n_ = config.n_particles;
  b.L_ = config.L;
  b.momenta_ = std::move(momenta);
  return b;
}

ParticleBasis ParticleBasis::plane_wave_cube(const SimulationConfig& config, int P) {
  std::vector<Vec3> q;
  for (int a = -P; a <= P; ++a)
    for (int c = -P; c <= P; ++c)
      for (int d = -P; d <= P; ++d)
        q.push_back(make_wave_vector(Vec3i(a, c, d), config.L).k);
  return plane_wave(config, std::move(q));
}

ParticleBasis ParticleBasis::sector(const SimulationConfig& config, const Vec3& q0, const Vec3& k,
                                    int P) {
  std::vector<Vec3> q;
  for (int j = -P; j <= P; ++j) q.push_back(q0 + j * k);
  return plane_wave(config, std::move(q));
}

ParticleBasis ParticleBasis::grid(const SimulationConfig& config, int points) {
  if (points < 1 || points % 2 == 0) throw ConfigError("grid needs an odd number of points");
  ParticleBasis b;
  b.kind_ = ParticleRepKind::Grid;
  b.n_ = config.n_particles;
  b.L_ = config.L;
  b.ng_ = points;
  return b;
}

long ParticleBasis::single_dim() const {
  if (kind_ == ParticleRepKind::Grid) return static_cast<long>(ng_) * ng_ * ng_;
  return static_cast<long>(momenta_.size());
}

long ParticleBasis::dim() const {
  long d = 1;
  for (int j = 0; j < n_; ++j) d *= single_dim();
  return d;
}

Vec3 ParticleBasis::grid_point(long idx) const {
  const long i1 = idx / (ng_ * ng_), i2 = (idx / ng_) % ng_, i3 = idx % ng_;
  return Vec3(-L_[0] / 2 + i1 * L_[0] / ng_, -L_[1] / 2 + i2 * L_[1] / ng_,
              -L_[2] / 2 + i3 * L_[2] / ng_);
}

namespace {

// (1/ng) sum_mu f(2 pi mu / L) exp(i 2 pi mu (i - j) / ng), mu in [-h, h]
MatXc spectral_1d(int ng, double L, const std::function<double(double)>& f) {
  const int h = (ng - 1) / 2;
  MatXc D(ng, ng);
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) {
      cplx acc = 0;
      for (int mu = -h; mu <= h; ++mu)
        acc += f(2 * kPi * mu / L) * std::polar(1.0, 2 * kPi * mu * (i - j) / double(ng));
      D(i, j) = acc / double(ng);
    }
  return D;
}

SpMat dense_to_sparse(const MatXc& d, double drop = 0.0) {
  std::vector<Trip> t;
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.cols(); ++j)
      if (std::abs(d(i, j)) > drop) t.emplace_back(i, j, d(i, j));
  SpMat s(d.rows(), d.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

// (1/L) int_{-L/2}^{L/2} g^gpow exp(i kappa x) dx
cplx box_average_1d(double kappa, double L, int gpow, double width) {
  if (gpow == 0 || std::isinf(width)) {
    const double m = kappa * L / (2 * kPi);
    if (std::abs(m - std::round(m)) < 1e-9) return std::round(m) == 0 ? 1.0 : 0.0;
    const double z = kappa * L / 2;
    return std::sin(z) / z;
  }
  auto f = [&](double x) {
    return std::exp(-gpow * x * x / (2 * width * width)) * std::polar(1.0, kappa * x);
  };
  return gl_fixed<cplx>(f, -L / 2, L / 2, 96) / L;
}

}  // namespace

SpMat ParticleBasis::momentum(int m, double hbar) const {
  const long d = single_dim();
  if (kind_ == ParticleRepKind::PlaneWave) {
    std::vector<Trip> t;
    for (long i = 0; i < d; ++i) t.emplace_back(i, i, hbar * momenta_[i][m]);
    SpMat s(d, d);
    s.setFromTriplets(t.begin(), t.end());
    return s;
  }
  const SpMat one = identity(ng_);
  const SpMat D = dense_to_sparse(spectral_1d(ng_, L_[m], [&](double q) { return hbar * q; }));
  if (m == 0) return kron(D, kron(one, one));
  if (m == 1) return kron(one, kron(D, one));
  return kron(one, kron(one, D));
}

SpMat ParticleBasis::momentum_squared(double hbar) const {
  const long d = single_dim();
  if (kind_ == ParticleRepKind::PlaneWave) {
    std::vector<Trip> t;
    for (long i = 0; i < d; ++i) t.emplace_back(i, i, hbar * hbar * momenta_[i].squaredNorm());
    SpMat s(d, d);
    s.setFromTriplets(t.begin(), t.end());
    return s;
  }
  const SpMat one = identity(ng_);
  auto sq = [&](int m) {
    return dense_to_sparse(spectral_1d(ng_, L_[m], [&](double q) { return hbar * hbar * q * q; }));
  };
  return kron(sq(0), kron(one, one)) + kron(one, kron(sq(1), one)) + kron(one, kron(one, sq(2)));
}

SpMat ParticleBasis::multiply(const ParticleFunction& f, double g_width) const {
  const long d = single_dim();
  std::vector<Trip> t;
  if (kind_ == ParticleRepKind::Grid) {
    for (long i = 0; i < d; ++i) t.emplace_back(i, i, f(grid_point(i), g_width));
  } else {
    for (long i = 0; i < d; ++i)
      for (long j = 0; j < d; ++j) {
        const Vec3 dq = momenta_[i] - momenta_[j];
        cplx acc = 0;
        for (const auto& term : f.terms) {
          cplx v = term.coef;
          for (int a = 0; a < 3 && v != 0.0; ++a)
            v *= box_average_1d(term.p[a] - dq[a], L_[a], term.gpow, g_width);
          acc += v;
        }
        if (acc != 0.0) t.emplace_back(i, j, acc);
      }
  }
  SpMat s(d, d);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SpMat ParticleBasis::embed(const SpMat& single, int j) const {
  long before = 1, after = 1;
  for (int q = 0; q < j; ++q) before *= single_dim();
  for (int q = j + 1; q < n_; ++q) after *= single_dim();
  return kron(identity(before), kron(single, identity(after)));
}

double OperatorMatrix::hermiticity_defect() const {
  SpMat d = m - SpMat(m.adjoint());
  double mx = 0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SpMat::InnerIterator it(d, k); it; ++it) mx = std::max(mx, std::abs(it.value()));
  return mx;
}

SpMat kron(const SpMat& a, const SpMat& b) {
  std::vector<Trip> t;
  t.reserve(static_cast<size_t>(a.nonZeros()) * b.nonZeros());
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SpMat::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SpMat::InnerIterator ib(b, kb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
  SpMat s(a.rows() * b.rows(), a.cols() * b.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SpMat identity(long n) {
  SpMat s(n, n);
  s.setIdentity();
  return s;
}

// ---------------------------------------------------------------- ladder algebra

std::pair<SpMat, SpMat> ladder_ops(const OscillatorBasis& basis, int v) {
  if (v < 0 || v >= basis.variables()) throw ConfigError("field variable out of range");
  std::vector<Trip> t;
  for (long i = 0; i < basis.dim(); ++i) {
    const int n = basis.occupation(i, v);
    if (n > 0) t.emplace_back(i - basis.stride(v), i, std::sqrt(double(n)));
  }
  SpMat a(basis.dim(), basis.dim());
  a.setFromTriplets(t.begin(), t.end());
  return {a, SpMat(a.adjoint())};
}

std::pair<SpMat, SpMat> ladder_ops(const OscillatorBasis& basis, const ModeSet& modes, int l,
                                   const Vec3i& s, int i) {
  if (!modes.contains_prime(s)) throw ConfigError("wave vector not in the halved mode set");
  return ladder_ops(basis, FieldVector::flat(l, modes.locate(s).first, i));
}

std::pair<SpMat, SpMat> complex_modes(const OscillatorBasis& basis, const ModeSet& modes, int l,
                                      const Vec3i& s) {
  if (s == Vec3i::Zero()) throw ConfigError("complex mode requested for k = 0");
  const auto [idx, sign] = modes.locate(s);
  if (idx < 0) throw ConfigError("wave vector not in the mode set");
  const SpMat a1 = ladder_ops(basis, FieldVector::flat(l, idx, 1)).first;
  const SpMat a2 = ladder_ops(basis, FieldVector::flat(l, idx, 2)).first;
  const double r = 1.0 / std::sqrt(2.0);
  SpMat a = (double(sign) * r) * a1 + cplx(0, -r) * a2;
  return {a, SpMat(a.adjoint())};
}

SpMat field_coordinate(const OscillatorBasis& basis, int v) {
  auto [a, ad] = ladder_ops(basis, v);
  return (basis.length(v) / std::sqrt(2.0)) * SpMat(a + ad);
}

SpMat field_momentum(const OscillatorBasis& basis, int v) {
  auto [a, ad] = ladder_ops(basis, v);
  return cplx(0, -basis.hbar() / (std::sqrt(2.0) * basis.length(v))) * SpMat(a - ad);
}

MatX single_variable_function(const OscillatorBasis& basis, int v,
                              const std::function<double(double)>& F, int nodes) {
  const QuadRule& gh = gauss_hermite(nodes);
  const int n = basis.cap() + 1;
  const double ell = basis.length(v);
  MatX M = MatX::Zero(n, n);
  std::vector<double> h(n);
  for (int q = 0; q < nodes; ++q) {
    hermite_functions(gh.x[q], n - 1, h.data());
    const double w = gh.w_scaled[q] * F(ell * gh.x[q]);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) M(a, b) += w * h[a] * h[b];
  }
  return M;
}

SpMat embed_variable(const OscillatorBasis& basis, int v, const MatX& single) {
  std::vector<Trip> t;
  const int n = basis.cap() + 1;
  for (long i = 0; i < basis.dim(); ++i) {
    const int col = basis.occupation(i, v);
    const long base = i - col * basis.stride(v);
    for (int r = 0; r < n; ++r)
      if (single(r, col) != 0.0) t.emplace_back(base + r * basis.stride(v), i, single(r, col));
  }
  SpMat s(basis.dim(), basis.dim());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

VecXc vacuum(const OscillatorBasis& basis) {
  VecXc v = VecXc::Zero(basis.dim());
  v[0] = 1.0;
  return v;
}

VecXc photon_state(const OscillatorBasis& basis, const ModeSet& modes,
                   const PhotonOccupations& occ) {
  std::map<std::pair<int, int>, int> per_pair;
  for (const auto& [key, n] : occ) {
    if (n < 0) throw ConfigError("occupations must be non-negative");
    const Vec3i s(key.second[0], key.second[1], key.second[2]);
    const auto [idx, sign] = modes.locate(s);
    if (idx < 0) throw ConfigError("photon mode not in the mode set");
    per_pair[{key.first, idx}] += n;
    if (per_pair[{key.first, idx}] > basis.cap())
      throw ConfigError("photon occupations exceed the truncation cap");
  }
  VecXc v = vacuum(basis);
  for (const auto& [key, n] : occ) {
    const Vec3i s(key.second[0], key.second[1], key.second[2]);
    const SpMat cr = complex_modes(basis, modes, key.first, s).second;
    double fact = 1;
    for (int q = 1; q <= n; ++q) {
      v = cr * v;
      fact *= q;
    }
    v /= std::sqrt(fact);
  }
  return v;
}

namespace {
template <typename Weight>
SpMat mode_sum(const OscillatorBasis& basis, const ModeSet& modes, const Weight& weight) {
  SpMat acc(basis.dim(), basis.dim());
  for (const auto& w : modes.lambda)
    for (int l = 1; l <= 2; ++l) {
      auto [a, ad] = complex_modes(basis, modes, l, w.s);
      acc += weight(w) * SpMat(ad * a);
    }
  acc.prune(cplx(0.0), 1e-14);
  return acc;
}
}  // namespace

SpMat h_rad(const OscillatorBasis& basis, const ModeSet& modes) {
  if (4 * modes.N() != basis.variables()) throw ConfigError("basis does not match the mode set");
  const double hc = basis.hbar();
  return mode_sum(basis, modes, [&](const WaveVector& w) {
    return cplx(hc * basis.omega()[FieldVector::flat(1, modes.locate(w.s).first, 1)], 0);
  });
}

SpMat number_operator(const OscillatorBasis& basis, const ModeSet& modes) {
  return mode_sum(basis, modes, [](const WaveVector&) { return cplx(1.0); });
}

SpMat field_momentum_total(const OscillatorBasis& basis, const ModeSet& modes, int m) {
  return mode_sum(basis, modes, [&](const WaveVector& w) { return cplx(basis.hbar() * w.k[m]); });
}

cplx field_wavefunction(const OscillatorBasis& basis, const VecXc& state, const VecX& a) {
  const int nv = basis.variables();
  const int n = basis.cap() + 1;
  std::vector<std::vector<double>> h(nv, std::vector<double>(n));
  double pre = 1;
  for (int v = 0; v < nv; ++v) {
    const double ell = basis.length(v);
    hermite_functions(a[v] / ell, n - 1, h[v].data());
    pre /= std::sqrt(ell);
  }
  cplx acc = 0;
  for (long i = 0; i < basis.dim(); ++i) {
    if (state[i] == 0.0) continue;
    double p = pre;
    for (int v = 0; v < nv; ++v) p *= h[v][basis.occupation(i, v)];
    acc += state[i] * p;
  }
  return acc;
}

SpMat h_rad_differential(const OscillatorBasis& basis, int nodes, double step) {
  static const double c8[9] = {-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72,
                               8.0 / 5,    -1.0 / 5,  8.0 / 315, -1.0 / 560};
  const QuadRule& gh = gauss_hermite(nodes);
  const int n = basis.cap() + 1;
  SpMat acc(basis.dim(), basis.dim());
  std::vector<double> h(n), hs(n);
  for (int v = 0; v < basis.variables(); ++v) {
    const double hw = basis.hbar() * basis.omega()[v];
    MatX M = MatX::Zero(n, n);
    for (int q = 0; q < nodes; ++q) {
      const double u = gh.x[q];
      hermite_functions(u, n - 1, h.data());
      std::vector<double> d2(n, 0.0);
      for (int o = -4; o <= 4; ++o) {
        hermite_functions(u + o * step, n - 1, hs.data());
        for (int b = 0; b < n; ++b) d2[b] += c8[o + 4] * hs[b];
      }
      for (int b = 0; b < n; ++b) {
        // hbar omega (-1/2 d^2/du^2 + u^2/2 - 1/2) in the scaled coordinate
        const double Dh = hw * (-0.5 * d2[b] / (step * step) + 0.5 * u * u * h[b] - 0.5 * h[b]);
        for (int a = 0; a < n; ++a) M(a, b) += gh.w_scaled[q] * h[a] * Dh;
      }
    }
    acc += embed_variable(basis, v, M);
  }
  return acc;
}

// ---------------------------------------------------------------- Hamiltonian

ProductBasis make_product_basis(const Model& model, const ParticleBasis& particle, int cap) {
  if (particle.particles() != model.n())
    throw ConfigError("particle basis does not match the particle count");
  return {particle, OscillatorBasis::from_model(model, cap)};
}

OperatorMatrix assemble_hamiltonian(const Model& model, std::shared_ptr<const ProductBasis> basis) {
  const ParticleBasis& pb = basis->particle;
  const OscillatorBasis& fb = basis->field;
  if (pb.particles() != model.n()) throw ConfigError("particle basis does not match the particle count");
  if (fb.variables() != model.field_dim()) throw ConfigError("field basis does not match the mode set");
  const SimulationConfig& cfg = model.config();
  const double hbar = cfg.hbar, c = cfg.c_light;
  const long Pd = pb.dim(), Fd = fb.dim();
  const SpMat IP = identity(Pd), IF = identity(Fd);
  const double gw = model.potential().mollifiers().g_is_one()
                        ? std::numeric_limits<double>::infinity()
                        : model.potential().mollifiers().width;

  SpMat H = kron(IP, h_rad(fb, model.lambda3()));

  if (model.n() >= 2 && cfg.coupled()) {
    SpMat V1(Pd, Pd);
    for (const auto& w : model.lambda1().lambda) {
      const SpMat Ep = pb.multiply(ParticleFunction::exponential(w.k), gw);
      const SpMat Em = pb.multiply(ParticleFunction::exponential(-w.k), gw);
      for (int j = 0; j < model.n(); ++j)
        for (int l = 0; l < model.n(); ++l) {
          if (j == l) continue;
          const double pre = 2 * kPi / model.volume() * model.charge(j) * model.charge(l) /
                             w.k.squaredNorm();
          if (pre == 0) continue;
          V1 += pre * SpMat(pb.embed(Ep, j) * pb.embed(Em, l));
        }
    }
    H += kron(V1, IF);
  }

  // atoms of tildeA: particle function times psi of one field variable, along e
  struct Atom {
    ParticleFunction f;
    int var;
    Vec3 e;
  };
  std::vector<Atom> atoms;
  const double kappa = model.potential().prefactor();
  for (const auto& t : model.potential().terms()) {
    atoms.push_back({ParticleFunction::cosine(t.k, kappa, 1), t.var_cos, t.e});
    atoms.push_back({ParticleFunction::sine(t.k, kappa, 1), t.var_sin, t.e});
  }
  const MollifierPair& moll = model.potential().mollifiers();
  std::map<int, SpMat> psi_op, psi2_op;
  for (const auto& at : atoms) {
    if (psi_op.count(at.var)) continue;
    psi_op[at.var] = embed_variable(
        fb, at.var, single_variable_function(fb, at.var, [&](double a) { return moll.psi(a); }));
    psi2_op[at.var] = embed_variable(fb, at.var, single_variable_function(fb, at.var, [&](double a) {
                                       const double p = moll.psi(a);
                                       return p * p;
                                     }));
  }

  for (int j = 0; j < model.n(); ++j) {
    const double m = model.mass(j), e = model.charge(j);
    H += (1.0 / (2 * m)) * kron(pb.embed(pb.momentum_squared(hbar), j), IF);
    if (e == 0.0 || atoms.empty()) continue;
    std::vector<SpMat> Fm;
    for (const auto& at : atoms) Fm.push_back(pb.embed(pb.multiply(at.f, gw), j));
    for (int mc = 0; mc < 3; ++mc) {
      const SpMat P = pb.embed(pb.momentum(mc, hbar), j);
      SpMat cross(Pd * Fd, Pd * Fd);
      for (size_t a = 0; a < atoms.size(); ++a) {
        const double ea = atoms[a].e[mc];
        if (ea == 0) continue;
        cross += ea * kron(SpMat(P * Fm[a] + Fm[a] * P), psi_op[atoms[a].var]);
      }
      H += (-e / (2 * m * c)) * cross;
      SpMat sq(Pd * Fd, Pd * Fd);
      for (size_t a = 0; a < atoms.size(); ++a)
        for (size_t b = 0; b < atoms.size(); ++b) {
          const double w = atoms[a].e[mc] * atoms[b].e[mc];
          if (w == 0) continue;
          const SpMat fab = pb.embed(pb.multiply(atoms[a].f * atoms[b].f, gw), j);
          const SpMat field = atoms[a].var == atoms[b].var
                                  ? psi2_op[atoms[a].var]
                                  : SpMat(psi_op[atoms[a].var] * psi_op[atoms[b].var]);
          sq += w * kron(fab, field);
        }
      H += (e * e / (2 * m * c * c)) * sq;
    }
  }
  H.prune(cplx(0.0), 1e-15);
  OperatorMatrix out{basis, H, true};
  const double defect = out.hermiticity_defect();
  if (defect > 1e-8)
    throw InvariantViolation("Hamiltonian lost hermiticity: defect " + format_double(defect));
  return out;
}

// ---------------------------------------------------------------- evolution

namespace {

VecXc krylov_step(const SpMat& H, const VecXc& v, double tau, double hbar, int m_max, double tol,
                  bool& ok) {
  const long n = v.size();
  const double beta0 = v.norm();
  if (beta0 == 0) {
    ok = true;
    return v;
  }
  const int m = static_cast<int>(std::min<long>(m_max, n));
  MatXc V(n, m + 1);
  VecX alpha = VecX::Zero(m), beta = VecX::Zero(m + 1);
  V.col(0) = v / beta0;
  int used = m;
  for (int j = 0; j < m; ++j) {
    VecXc w = H * V.col(j);
    alpha[j] = V.col(j).dot(w).real();
    w -= alpha[j] * V.col(j);
    if (j > 0) w -= beta[j] * V.col(j - 1);
    // full reorthogonalization keeps the small basis clean
    for (int q = 0; q <= j; ++q) w -= V.col(q).dot(w) * V.col(q);
    beta[j + 1] = w.norm();
    if (beta[j + 1] < 1e-13 * std::max(1.0, std::abs(alpha[j]))) {
      used = j + 1;
      break;
    }
    V.col(j + 1) = w / beta[j + 1];
  }
  MatX T = MatX::Zero(used, used);
  for (int j = 0; j < used; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < used) T(j, j + 1) = T(j + 1, j) = beta[j + 1];
  }
  Eigen::SelfAdjointEigenSolver<MatX> es(T);
  VecXc y = VecXc::Zero(used);
  for (int q = 0; q < used; ++q)
    y += es.eigenvectors().col(q).cast<cplx>() *
         (std::polar(1.0, -es.eigenvalues()[q] * tau / hbar) * es.eigenvectors()(0, q));
  const double err = used < m || used == n ? 0.0 : beta[used] * std::abs(y[used - 1]);
  ok = err <= tol;
  return beta0 * (V.leftCols(used) * y);
}

}  // namespace

StateVector reference_evolve(const OperatorMatrix& H, const StateVector& f, double t, double hbar,
                             const EvolveOptions& opt) {
  if (!H.hermitian || H.hermiticity_defect() > 1e-10)
    throw InvariantViolation("reference evolution requires a hermitian operator");
  if (H.m.rows() != f.c.size()) throw ConfigError("state does not match the operator");
  StateVector out{f.basis, f.c};
  if (t == 0) return out;
  const long n = f.c.size();
  if (n <= opt.dense_limit) {
    Eigen::SelfAdjointEigenSolver<MatXc> es{MatXc(H.m)};
    VecXc coef = es.eigenvectors().adjoint() * f.c;
    for (long q = 0; q < n; ++q) coef[q] *= std::polar(1.0, -es.eigenvalues()[q] * t / hbar);
    out.c = es.eigenvectors() * coef;
    return out;
  }
  double remaining = t, tau = t;
  int guard = 0;
  while (remaining > 0) {
    tau = std::min(tau, remaining);
    bool ok = false;
    VecXc next = krylov_step(H.m, out.c, tau, hbar, opt.krylov_dim, opt.tol * out.c.norm(), ok);
    if (!ok) {
      tau *= 0.5;
      if (++guard > 200) throw BudgetExhausted("Krylov evolution did not converge");
      continue;
    }
    out.c = next;
    remaining -= tau;
  }
  return out;
}

VecX spectrum(const OperatorMatrix& H) {
  if (!H.hermitian) throw InvariantViolation("spectrum requires a hermitian operator");
  Eigen::SelfAdjointEigenSolver<MatXc> es(MatXc(H.m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

void write_state_csv(std::ostream& os, const StateVector& s) {
  const OscillatorBasis& fb = s.basis->field;
  std::vector<std::string> cols = {"index", "particle_index"};
  for (int v = 0; v < fb.variables(); ++v) cols.push_back("n" + std::to_string(v));
  cols.push_back("re");
  cols.push_back("im");
  CsvTable t(cols);
  for (long i = 0; i < s.c.size(); ++i) {
    auto row = t.row();
    row << static_cast<long long>(i) << static_cast<long long>(i / fb.dim());
    for (int v = 0; v < fb.variables(); ++v) row << fb.occupation(i % fb.dim(), v);
    row << s.c[i].real() << s.c[i].imag();
  }
  t.write(os);
}

void write_spectrum_csv(std::ostream& os, const VecX& ev, double tol) {
  CsvTable t({"level", "value", "multiplicity"});
  int level = 0;
  for (long i = 0; i < ev.size();) {
    long j = i;
    while (j < ev.size() && std::abs(ev[j] - ev[i]) <= tol * std::max(1.0, std::abs(ev[i]))) ++j;
    double mean = 0;
    for (long q = i; q < j; ++q) mean += ev[q];
    mean /= double(j - i);
    // snap values that are integers to rounding noise
    if (std::abs(mean - std::round(mean)) < tol) mean = std::round(mean) + 0.0;
    t.row() << level++ << mean << static_cast<long long>(j - i);
    i = j;
  }
  t.write(os);
}

nlohmann::json sparsity_stats(const SpMat& m) {
  SpMat c = m;
  c.makeCompressed();
  long max_row = 0;
  std::vector<long> per_row(c.rows(), 0);
  for (int k = 0; k < c.outerSize(); ++k)
    for (SpMat::InnerIterator it(c, k); it; ++it) ++per_row[it.row()];
  for (long r : per_row) max_row = std::max(max_row, r);
  const double total = double(c.rows()) * double(c.cols());
  return {{"rows", c.rows()},
          {"cols", c.cols()},
          {"nnz", c.nonZeros()},
          {"density", total > 0 ? double(c.nonZeros()) / total : 0.0},
          {"max_row_nnz", max_row}};
}

}  // namespace fmqed
