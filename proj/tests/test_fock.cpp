#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "fmqed/errors.hpp"
#include "fmqed/fock.hpp"
#include "fmqed/model.hpp"
#include "fmqed/quadrature.hpp"

using namespace fmqed;

namespace {

SimulationConfig one_mode() {
  SimulationConfig c;
  c.mode_select = {Vec3i(1, 0, 0)};
  return c;
}

// basis states with every occupation strictly below the cap
std::vector<long> interior(const OscillatorBasis& b, int margin) {
  std::vector<long> out;
  for (long i = 0; i < b.dim(); ++i) {
    bool ok = true;
    for (int v = 0; v < b.variables(); ++v) ok = ok && b.occupation(i, v) + margin <= b.cap();
    if (ok) out.push_back(i);
  }
  return out;
}

double interior_defect(const SpMat& A, const std::vector<long>& cols) {
  double worst = 0;
  for (long c : cols) worst = std::max(worst, SpMat(A.col(c)).norm());
  return worst;
}

VecXc random_state(long n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  VecXc v(n);
  for (long i = 0; i < n; ++i) v[i] = cplx(g(rng), g(rng));
  return v / v.norm();
}

}  // namespace

TEST_CASE("oscillator basis enumeration") {
  const OscillatorBasis b(VecX::Constant(3, 1.0), 2, 1.0, 1.0);
  CHECK(b.dim() == 27);
  for (long i = 0; i < b.dim(); ++i) CHECK(b.index(b.occupations(i)) == i);
  CHECK_THROWS_AS(OscillatorBasis(VecX::Constant(1, 1.0), -1, 1.0, 1.0), ConfigError);
  CHECK(OscillatorBasis(VecX::Constant(2, 1.0), 0, 1.0, 1.0).dim() == 1);
}

TEST_CASE("real ladder operators") {
  const OscillatorBasis b(VecX::Constant(2, 1.5), 4, 2.0, 1.0);
  auto [a, ad] = ladder_ops(b, 1);
  const VecXc vac = vacuum(b);
  CHECK((a * vac).norm() == 0.0);
  CHECK(SpMat(ad - SpMat(a.adjoint())).norm() == 0.0);
  const SpMat comm = a * ad - ad * a;
  CHECK(interior_defect(comm - identity(b.dim()), interior(b, 1)) < 1e-14);
  // cap boundary: the creator annihilates top states
  std::vector<int> top = {0, 4};
  VecXc e = VecXc::Zero(b.dim());
  e[b.index(top)] = 1;
  CHECK((ad * e).norm() == 0.0);
}

TEST_CASE("complex modes: commutators and parity") {
  SimulationConfig c;
  c.mode_select = {Vec3i(1, 0, 0), Vec3i(0, 1, 0)};
  const Model mm(c);
  const OscillatorBasis b = OscillatorBasis::from_model(mm, 3);
  const auto& modes = mm.lambda3();
  const auto in1 = interior(b, 1);
  const SpMat I = identity(b.dim());
  for (const auto& w1 : modes.lambda)
    for (int l1 = 1; l1 <= 2; ++l1) {
      auto [a1, ad1] = complex_modes(b, modes, l1, w1.s);
      for (const auto& w2 : modes.lambda)
        for (int l2 = 1; l2 <= 2; ++l2) {
          auto [a2, ad2] = complex_modes(b, modes, l2, w2.s);
          const bool same = l1 == l2 && w1.s == w2.s;
          CHECK(SpMat(a1 * a2 - a2 * a1).norm() < 1e-14);
          const SpMat cm = a1 * ad2 - ad2 * a1;
          CHECK(interior_defect(same ? SpMat(cm - I) : cm, in1) < 1e-13);
        }
    }
  const auto in2 = interior(b, 2);
  const Vec3i s(0, 1, 0);
  auto [a, ad] = complex_modes(b, modes, 2, s);
  const SpMat lhs = a * ad * ad - ad * ad * a;
  CHECK(interior_defect(SpMat(lhs - 2.0 * ad), in2) < 1e-13);
  // real ladder parity over -k
  auto [r1p, x1] = ladder_ops(b, modes, 1, Vec3i(1, 0, 0), 1);
  (void)x1;
  auto [cp, cpd] = complex_modes(b, modes, 1, Vec3i(1, 0, 0));
  auto [cm, cmd] = complex_modes(b, modes, 1, Vec3i(-1, 0, 0));
  (void)cpd;
  (void)cmd;
  // a_{-k} = (-a1 - i a2)/sqrt2 and a_k = (a1 - i a2)/sqrt2 so a_k - a_{-k} = sqrt2 a1
  CHECK(SpMat(cp - cm - std::sqrt(2.0) * r1p).norm() < 1e-14 * r1p.norm());
  CHECK_THROWS_AS(complex_modes(b, modes, 1, Vec3i(0, 0, 0)), ConfigError);
  CHECK_THROWS_AS(ladder_ops(b, modes, 1, Vec3i(0, 0, 1), 1), ConfigError);
}

TEST_CASE("vacuum and photon states") {
  const Model m(one_mode());
  const OscillatorBasis b = OscillatorBasis::from_model(m, 4);
  const SpMat H = h_rad(b, m.lambda3());
  const SpMat Nop = number_operator(b, m.lambda3());
  const VecXc vac = vacuum(b);
  CHECK(vac.norm() == 1.0);
  CHECK((H * vac).norm() <= 1e-12);
  const double ck = m.lambda3().lambda_prime[0].k.norm();
  PhotonOccupations one = {{{1, {1, 0, 0}}, 1}};
  const VecXc p1 = photon_state(b, m.lambda3(), one);
  CHECK(p1.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((H * p1 - ck * p1).norm() < 1e-12);
  PhotonOccupations many = {{{1, {1, 0, 0}}, 2}, {{2, {-1, 0, 0}}, 1}};
  const VecXc p3 = photon_state(b, m.lambda3(), many);
  CHECK((H * p3 - 3 * ck * p3).norm() < 1e-12);
  CHECK((Nop * p3 - 3.0 * p3).norm() < 1e-12);
  PhotonOccupations two = {{{1, {1, 0, 0}}, 2}};
  CHECK(std::abs(p1.dot(photon_state(b, m.lambda3(), two))) < 1e-15);
  PhotonOccupations over = {{{1, {1, 0, 0}}, 5}};
  CHECK_THROWS_AS(photon_state(b, m.lambda3(), over), ConfigError);
}

TEST_CASE("number, momentum and energy commute") {
  SimulationConfig c;
  c.mode_select = {Vec3i(1, 0, 0), Vec3i(0, 1, 1)};
  const Model m(c);
  const OscillatorBasis b = OscillatorBasis::from_model(m, 2);
  const SpMat H = h_rad(b, m.lambda3()), Nop = number_operator(b, m.lambda3());
  const SpMat P = field_momentum_total(b, m.lambda3(), 1);
  CHECK(SpMat(H * Nop - Nop * H).norm() < 1e-12);
  CHECK(SpMat(H * P - P * H).norm() < 1e-12);
  CHECK(SpMat(P * Nop - Nop * P).norm() < 1e-12);
  const VecXc r = random_state(b.dim(), 4);
  CHECK(r.dot(H * r).real() >= 0);
}

TEST_CASE("h_rad spectrum for one mode and cap 2") {
  const Model m(one_mode());
  const OscillatorBasis b = OscillatorBasis::from_model(m, 2);
  auto basis = std::make_shared<const ProductBasis>(ProductBasis{ParticleBasis::none(), b});
  const OperatorMatrix H{basis, h_rad(b, m.lambda3()), true};
  const VecX ev = spectrum(H);
  std::vector<int> mult(9, 0);
  for (double e : ev) {
    const double r = std::round(e);
    CHECK(std::abs(e - r) < 1e-12);
    ++mult[static_cast<int>(r)];
  }
  CHECK(mult == std::vector<int>{1, 4, 10, 16, 19, 16, 10, 4, 1});
  std::ostringstream os;
  write_spectrum_csv(os, ev);
  CHECK(os.str().rfind("level,value,multiplicity\n0,0,1\n1,1,4\n", 0) == 0);
}

TEST_CASE("h_rad matches the differential form") {
  const Model m(one_mode());
  const OscillatorBasis b = OscillatorBasis::from_model(m, 4);
  const MatXc D(h_rad_differential(b));
  const MatXc H(h_rad(b, m.lambda3()));
  CHECK((D - H).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("coordinate form of a creator on the vacuum") {
  const Model m(one_mode());
  const OscillatorBasis b = OscillatorBasis::from_model(m, 3);
  const auto& modes = m.lambda3();
  const VecXc vac = vacuum(b);
  const VecXc st = complex_modes(b, modes, 1, Vec3i(1, 0, 0)).second * vac;
  const double V = m.volume(), kk = modes.lambda_prime[0].k.norm();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, std::sqrt(V / kk));
  for (int t = 0; t < 5; ++t) {
    VecX a(4);
    for (int i = 0; i < 4; ++i) a[i] = g(rng);
    // a*_{1k} = (a^(1) + i a^(2))/sqrt2
    const cplx astar = cplx(a[FieldVector::flat(1, 0, 1)], a[FieldVector::flat(1, 0, 2)]) / std::sqrt(2.0);
    const cplx expect = std::sqrt(2 * kk / V) * astar * field_wavefunction(b, vac, a);
    CHECK(std::abs(field_wavefunction(b, st, a) - expect) < 1e-12 * std::abs(expect) + 1e-300);
  }
}

TEST_CASE("Gram matrix of the photon family is the identity") {
  SimulationConfig c;
  c.mode_select = {Vec3i(1, 0, 0)};
  const Model m(c);
  const OscillatorBasis b = OscillatorBasis::from_model(m, 4);
  const auto& modes = m.lambda3();
  std::vector<VecXc> states;
  for (int n1 = 0; n1 <= 2; ++n1)
    for (int n2 = 0; n2 <= 2; ++n2)
      for (int n3 = 0; n3 <= 2; ++n3)
        for (int n4 = 0; n4 <= 2; ++n4) {
          PhotonOccupations o;
          if (n1) o[{1, {1, 0, 0}}] = n1;
          if (n2) o[{2, {1, 0, 0}}] = n2;
          if (n3) o[{1, {-1, 0, 0}}] = n3;
          if (n4) o[{2, {-1, 0, 0}}] = n4;
          states.push_back(photon_state(b, modes, o));
        }
  MatXc G(states.size(), states.size());
  for (size_t i = 0; i < states.size(); ++i)
    for (size_t j = 0; j < states.size(); ++j) G(i, j) = states[i].dot(states[j]);
  CHECK((G - MatXc::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Hamiltonian assembly") {
  SimulationConfig c;
  c.mode_select = {Vec3i(1, 0, 0)};
  c.n_particles = 1;
  c.masses = {1};
  c.charges = {0};
  const Model m0(c);
  auto basis = std::make_shared<const ProductBasis>(
      make_product_basis(m0, ParticleBasis::plane_wave_cube(c, 1), 1));
  const OperatorMatrix H0 = assemble_hamiltonian(m0, basis);
  CHECK(H0.hermitian);
  // decoupled: kinetic (diagonal in plane waves) plus h_rad
  const SpMat Hr = h_rad(basis->field, m0.lambda3());
  const SpMat K = basis->particle.momentum_squared(c.hbar) * (0.5 / c.masses[0]);
  const SpMat expect = kron(K, identity(basis->field.dim())) + kron(identity(basis->particle.dim()), Hr);
  CHECK(SpMat(H0.m - expect).norm() < 1e-12);

  c.charges = {1};
  c.sigma_psi = 100;
  c.width_g = std::numeric_limits<double>::infinity();
  const Model m1(c);
  auto b1 = std::make_shared<const ProductBasis>(
      make_product_basis(m1, ParticleBasis::sector(c, Vec3(0, 1, 0), m1.lambda3().lambda_prime[0].k, 2), 2));
  const OperatorMatrix H1 = assemble_hamiltonian(m1, b1);
  CHECK(H1.hermiticity_defect() < 1e-10);
  const VecXc r = random_state(b1->dim(), 12);
  CHECK(std::abs(r.dot(H1.m * r).imag()) < 1e-10);

  const Model none{SimulationConfig(one_mode())};
  auto bn = std::make_shared<const ProductBasis>(make_product_basis(none, ParticleBasis::none(), 2));
  const OperatorMatrix Hn = assemble_hamiltonian(none, bn);
  CHECK(SpMat(Hn.m - h_rad(bn->field, none.lambda3())).norm() < 1e-12);
}

TEST_CASE("reference evolution") {
  const Model m(one_mode());
  auto basis = std::make_shared<const ProductBasis>(make_product_basis(m, ParticleBasis::none(), 3));
  const OperatorMatrix H{basis, h_rad(basis->field, m.lambda3()), true};
  const StateVector vac{basis, vacuum(basis->field)};
  const StateVector out = reference_evolve(H, vac, 2.3, 1.0);
  CHECK((out.c - vac.c).norm() < 1e-12);
  PhotonOccupations one = {{{2, {1, 0, 0}}, 1}};
  const StateVector p{basis, photon_state(basis->field, m.lambda3(), one)};
  for (long dense : {2048L, 0L}) {
    EvolveOptions o;
    o.dense_limit = dense;
    const StateVector q = reference_evolve(H, p, 0.7, 1.0, o);
    const cplx ov = p.c.dot(q.c);
    CHECK(std::abs(std::abs(ov) - 1) < 1e-10);
    CHECK(std::abs(ov - std::polar(1.0, -0.7)) < 1e-10);
    const StateVector r{basis, random_state(basis->dim(), 3)};
    CHECK(std::abs(reference_evolve(H, r, 1.9, 1.0, o).norm() - 1) < 1e-10);
  }
  OperatorMatrix bad = H;
  bad.hermitian = false;
  CHECK_THROWS_AS(reference_evolve(bad, vac, 1.0, 1.0), InvariantViolation);
}

TEST_CASE("state CSV and sparsity stats") {
  const Model m(one_mode());
  auto basis = std::make_shared<const ProductBasis>(make_product_basis(m, ParticleBasis::none(), 1));
  const StateVector v{basis, vacuum(basis->field)};
  std::ostringstream os;
  write_state_csv(os, v);
  CHECK(os.str().rfind("index,particle_index,n0,n1,n2,n3,re,im\n", 0) == 0);
  const auto j = sparsity_stats(h_rad(basis->field, m.lambda3()));
  CHECK(j.contains("nnz"));
}
