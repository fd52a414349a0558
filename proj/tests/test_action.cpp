#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fmqed/action.hpp"
#include "fmqed/errors.hpp"
#include "fmqed/model.hpp"

using namespace fmqed;

namespace {

SimulationConfig one_mode_particle(double charge) {
  SimulationConfig c;
  c.mode_select = {Vec3i(1, 0, 0)};
  c.n_particles = 1;
  c.masses = {1};
  c.charges = {charge};
  return c;
}

SimulationConfig coupled_pair() {
  SimulationConfig c;
  c.L = {3.0, 4.0, 5.0};
  c.M = {1, 1, 1};
  c.mode_select = {Vec3i(1, 0, 0), Vec3i(0, 1, 1), Vec3i(1, -1, 0)};
  c.n_particles = 2;
  c.masses = {1.0, 1.7};
  c.charges = {0.8, -1.1};
  c.sigma_psi = 5;
  c.width_g = 6;
  return c;
}

VecX random_vec(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0, scale);
  VecX v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("subdivision validation and mesh") {
  CHECK_THROWS_AS(Subdivision({0.0, 1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(Subdivision({0.0}), ConfigError);
  const Subdivision s({0.0, 0.25, 1.0});
  CHECK(s.mesh() == 0.75);
  const Subdivision u = Subdivision::uniform(2.0, 8);
  CHECK(u.steps() == 8);
  CHECK(u.end() == 2.0);
  CHECK(u.mesh() == doctest::Approx(0.25));
}

TEST_CASE("hand value of the decoupled one-mode example") {
  const Model m(one_mode_particle(0));
  VecX x(3), y(3);
  x << 1, 0, 0;
  y << 0, 0, 0;
  const VecX Z = VecX::Zero(4);
  CHECK(std::abs(segment_action(m, 1.0, 0.0, x, y, Z, Z) - 2.5) <= 1e-10 * 2.5);
  CHECK_THROWS_AS(segment_action(m, 0.0, 0.0, x, y, Z, Z), ConfigError);
}

TEST_CASE("zero displacement gives minus the potential") {
  SimulationConfig c = coupled_pair();
  for (double& e : c.charges) e = 0;
  const Model m(c);
  std::mt19937_64 rng(1);
  const VecX x = random_vec(rng, 6, 1.0), X = random_vec(rng, m.field_dim(), 1.0);
  SimulationConfig cc = coupled_pair();
  const Model mc(cc);
  // V1 is charge-dependent, so evaluate it with the charged model's Coulomb term
  const double s = segment_action(m, 0.7, 0.2, x, x, X, X);
  const double V2 = potential_V2(X.data(), m.omega(), c);
  CHECK(s == doctest::Approx(-0.5 * V2).epsilon(1e-12));
  const SegmentTerms t = segment_action_terms(mc, 0.7, 0.2, x, x, X, X);
  CHECK(t.coulomb == doctest::Approx(-0.5 * mc.coulomb().value(x)).epsilon(1e-12));
  CHECK(t.gauge == 0.0);
  CHECK(t.kinetic == 0.0);
}

TEST_CASE("time reversal flips only the gauge term") {
  const Model m(coupled_pair());
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const VecX x = random_vec(rng, 6, 1.0), y = random_vec(rng, 6, 1.0);
    const VecX X = random_vec(rng, m.field_dim(), 2.0), Y = random_vec(rng, m.field_dim(), 2.0);
    const SegmentTerms f = segment_action_terms(m, 1.3, 0.9, x, y, X, Y);
    const SegmentTerms b = segment_action_terms(m, 1.3, 0.9, y, x, Y, X);
    CHECK(f.gauge != 0.0);
    CHECK(rel(b.gauge, -f.gauge) < 1e-10);
    CHECK(rel(b.kinetic, f.kinetic) < 1e-14);
    CHECK(rel(b.coulomb, f.coulomb) < 1e-10);
    CHECK(rel(b.field_kinetic, f.field_kinetic) < 1e-14);
    CHECK(rel(b.field_potential, f.field_potential) < 1e-10);
  }
}

TEST_CASE("broken action: additivity and midpoint refinement") {
  const Model m(coupled_pair());
  std::mt19937_64 rng(3);
  const std::vector<double> times = {0.0, 0.3, 0.45, 1.0};
  BrokenPath p{Subdivision(times), {}, {}, {}};
  for (size_t i = 0; i < times.size(); ++i) {
    p.x.push_back(random_vec(rng, 6, 1.0));
    p.X.push_back(random_vec(rng, m.field_dim(), 1.0));
  }
  double hand = 0;
  for (size_t i = 0; i + 1 < times.size(); ++i)
    hand += segment_action(m, times[i + 1], times[i], p.x[i + 1], p.x[i], p.X[i + 1], p.X[i]);
  const double total = broken_action(m, p);
  CHECK(rel(total, hand) < 1e-14);

  BrokenPath q{Subdivision({0.0, 0.15, 0.3, 0.45, 1.0}), {}, {}, {}};
  q.x = {p.x[0], 0.5 * (p.x[0] + p.x[1]), p.x[1], p.x[2], p.x[3]};
  q.X = {p.X[0], 0.5 * (p.X[0] + p.X[1]), p.X[1], p.X[2], p.X[3]};
  CHECK(rel(broken_action(m, q), total) < 1e-10);

  const auto [xm, Xm] = p.at(0.45);
  CHECK(xm == p.x[2]);
  CHECK(Xm == p.X[2]);
  BrokenPath one{Subdivision({0.2, 0.9}), {p.x[0], p.x[1]}, {p.X[0], p.X[1]}, {}};
  CHECK(broken_action(m, one) == segment_action(m, 0.9, 0.2, p.x[1], p.x[0], p.X[1], p.X[0]));
}

TEST_CASE("kinetic positivity without potentials") {
  SimulationConfig c = one_mode_particle(0);
  c.mode_select.clear();
  const Model m(c, {}, {}, {});
  std::mt19937_64 rng(4);
  BrokenPath p{Subdivision::uniform(1.0, 4), {}, {}, {}};
  for (int i = 0; i <= 4; ++i) {
    p.x.push_back(random_vec(rng, 3, 1.0));
    p.X.push_back(VecX());
  }
  CHECK(broken_action(m, p) > 0);
}

TEST_CASE("constraint elimination identity") {
  const Vec3 k(1, 0, 0);
  const IdentityCheck a = constraint_identity_check({Vec3(0, 0, 0), Vec3(0, 2, 1)}, {1, 1}, k);
  CHECK(a.lhs == doctest::Approx(-32 * kPi * kPi).epsilon(1e-12));
  CHECK(a.rhs == doctest::Approx(-32 * kPi * kPi).epsilon(1e-12));
  const IdentityCheck b = constraint_identity_check({Vec3(1, 2, 3)}, {2.0}, k);
  CHECK(std::abs(b.lhs) < 1e-12);
  CHECK(b.rhs == 0.0);
  CHECK_THROWS_AS(constraint_identity_check({Vec3(1, 2, 3)}, {2.0}, Vec3::Zero()), ConfigError);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 4;
    std::vector<Vec3> x;
    std::vector<double> e;
    for (int j = 0; j < n; ++j) {
      x.emplace_back(u(rng), u(rng), u(rng));
      e.push_back(u(rng));
    }
    const IdentityCheck r = constraint_identity_check(x, e, Vec3(u(rng), u(rng), u(rng)));
    CHECK(std::abs(r.lhs - r.rhs) <= 1e-10 * std::max(std::abs(r.rhs), 1e-12));
  }
}

TEST_CASE("scalar-offset path action") {
  const Model m(one_mode_particle(0));
  VecX x(3), y(3);
  x << 0.3, 0.1, 0;
  y << 0, 0.2, 0;
  const VecX Z = VecX::Zero(4);
  const double base = segment_action(m, 1.0, 0.0, x, y, Z, Z);
  VecX xi = VecX::Zero(2);
  CHECK(rel(phi_path_action(m, 1.0, 0.0, x, y, Z, Z, xi), base) < 1e-12);
  xi << std::sqrt(4 * kPi * m.volume()), 0.0;
  CHECK(phi_path_action(m, 1.0, 0.0, x, y, Z, Z, xi) - base == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(phi_path_action(m, 1.0, 0.0, x, y, Z, Z, -xi) ==
        doctest::Approx(phi_path_action(m, 1.0, 0.0, x, y, Z, Z, xi)).epsilon(1e-15));
}

TEST_CASE("scalar-offset decomposition matches the closed form with charges") {
  SimulationConfig c = coupled_pair();
  const Model m(c);
  std::mt19937_64 rng(6);
  const VecX x = random_vec(rng, 6, 1.0), y = random_vec(rng, 6, 1.0);
  const VecX X = random_vec(rng, m.field_dim(), 1.0), Y = random_vec(rng, m.field_dim(), 1.0);
  const VecX xi = random_vec(rng, 2 * m.lambda1().N(), 0.5);
  CHECK(rel(phi_path_action(m, 0.8, 0.1, x, y, X, Y, xi),
            phi_path_action_closed(m, 0.8, 0.1, x, y, X, Y, xi)) < 1e-9);
}

TEST_CASE("external field terms") {
  SimulationConfig c;
  c.n_particles = 2;
  c.masses = {1, 1};
  c.charges = {1.5, -0.5};
  const Model m(c);
  VecX x(6), y(6);
  x << 1, 2, 3, 0.5, 0.1, -1;
  y << 0.2, 1.1, 3.3, -0.5, 0.4, 0.0;
  const double V0 = 0.7;
  const double a = external_field_terms(
      m, 2.0, 1.5, x, y, [](double, const Vec3&) { return Vec3::Zero(); },
      [&](double, const Vec3&) { return V0; });
  CHECK(a == doctest::Approx(-0.5 * (1.5 - 0.5) * V0).epsilon(1e-12));
  const double A0 = 0.3;
  const double b = external_field_terms(
      m, 2.0, 1.5, x, y, [&](double, const Vec3&) { return Vec3(A0, 0, 0); },
      [](double, const Vec3&) { return 0.0; });
  CHECK(b == doctest::Approx(1.5 * A0 * (1 - 0.2) - 0.5 * A0 * (0.5 + 0.5)).epsilon(1e-12));
  SimulationConfig n = c;
  n.charges = {0, 0};
  const Model mn(n);
  CHECK(external_field_terms(
            mn, 2.0, 1.5, x, y, [&](double, const Vec3&) { return Vec3(1, 1, 1); },
            [](double, const Vec3&) { return 3.0; }) == 0.0);
}
