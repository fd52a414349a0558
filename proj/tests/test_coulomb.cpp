#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fmqed/coulomb.hpp"
#include "fmqed/errors.hpp"
#include "fmqed/lattice.hpp"
#include "fmqed/model.hpp"

using namespace fmqed;

namespace {
SimulationConfig two_charges(double e1, double e2) {
  SimulationConfig c;
  c.n_particles = 2;
  c.masses = {1, 1};
  c.charges = {e1, e2};
  return c;
}
}  // namespace

TEST_CASE("cutoff Coulomb term at coincident points") {
  const SimulationConfig c = two_charges(1, 1);
  const ModeSet l1 = build_mode_set(c, 1);
  // (2 pi / (2 pi)^3) * 2 * sum 1/|s|^2 over the 26 neighbours (44/3)
  const double expect = 2 * kPi / std::pow(2 * kPi, 3) * 2 * (44.0 / 3.0);
  const ParticlePositions x = {Vec3(0.3, 0.1, 0.2), Vec3(0.3, 0.1, 0.2)};
  CHECK(potential_V1(x, {1, 1}, l1, c) == doctest::Approx(0.74302).epsilon(1e-5));
  CHECK(potential_V1(x, {1, 1}, l1, c) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(potential_V1(x, {1, -1}, l1, c) == doctest::Approx(-expect).epsilon(1e-14));
  CHECK(potential_V1({Vec3(1, 2, 3)}, {1}, l1, c) == 0.0);
}

TEST_CASE("Coulomb term: symmetry, translation invariance, gradient") {
  SimulationConfig c = two_charges(1, -2);
  c.M = {2, 1, 1};
  c.L = {3.0, 4.0, 5.0};
  const Model m(c);
  const ParticlePositions x = {Vec3(0.2, -0.4, 1.3), Vec3(-0.7, 0.9, 0.1)};
  const double v = potential_V1(x, c.charges, m.lambda1(), c);
  CHECK(potential_V1({x[1], x[0]}, {c.charges[1], c.charges[0]}, m.lambda1(), c) ==
        doctest::Approx(v).epsilon(1e-14));
  const Vec3 shift(10.3, -2.2, 0.7);
  CHECK(std::abs(potential_V1({x[0] + shift, x[1] + shift}, c.charges, m.lambda1(), c) - v) <=
        1e-12 * std::abs(v));
  VecX flat(6);
  flat << x[0], x[1];
  CHECK(m.coulomb().value(flat) == doctest::Approx(v).epsilon(1e-13));
  const VecX g = m.coulomb().gradient(flat);
  for (int i = 0; i < 6; ++i) {
    VecX p = flat, q = flat;
    p[i] += 1e-6;
    q[i] -= 1e-6;
    CHECK(g[i] == doctest::Approx((m.coulomb().value(p) - m.coulomb().value(q)) / 2e-6).epsilon(1e-6));
  }
}

TEST_CASE("continuum oracle") {
  CHECK(continuum_coulomb_oracle(Vec3(1, 0, 0)) == doctest::Approx(0.5));
  CHECK(continuum_coulomb_oracle(Vec3(0, 2, 0)) == doctest::Approx(0.25));
  CHECK(continuum_coulomb_oracle(Vec3(0, 0, 0.1)) == doctest::Approx(5.0));
  CHECK_THROWS_AS(continuum_coulomb_oracle(Vec3::Zero()), ConfigError);
  CHECK(coulomb_pair_limit({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {1, 1}) == doctest::Approx(1.0));
  CHECK(coulomb_pair_limit({Vec3(0, 0, 0), Vec3(2, 0, 0)}, {1, -1}) == doctest::Approx(-0.5));
}

TEST_CASE("summands satisfy their majorants") {
  CHECK(check_majorant(riemann_test_summand()));
  CHECK(check_majorant(counterexample_summand()));
  LatticeSummand bad = riemann_test_summand();
  bad.bound = [](double r) { return 0.5 / (r * r * (1 + r * r)); };
  CHECK_FALSE(check_majorant(bad));
}

TEST_CASE("tail bound of a known majorant") {
  // 4 pi int_R^inf (u + d/2)^2 e^{-u} du at d = 0 and R = 0 is 8 pi
  CHECK(majorant_tail_bound([](double u) { return std::exp(-u); }, 0.0, 0.0) ==
        doctest::Approx(8 * kPi).epsilon(1e-7));
}

TEST_CASE("Riemann sum approaches its integral and ignores summation order") {
  const LatticeSummand s = riemann_test_summand();
  CHECK(s.analytic_limit == doctest::Approx(2 * kPi * kPi));
  RiemannOptions o;
  double prev = 1e9;
  for (double L : {5.0, 10.0, 20.0}) {
    const RiemannResult r = riemann_sum(s, {L, L, L}, o);
    REQUIRE(r.converged);
    CHECK(r.tail_bound - r.tail_estimate <= o.rtol * r.value);
    CHECK(r.tail_bound >= r.tail_estimate);
    const double err = std::abs(r.value - s.analytic_limit);
    CHECK(err < prev);
    prev = err;
  }
  o.shuffle_seed = 99;
  const RiemannResult a = riemann_sum(s, {10, 10, 10}, {});
  const RiemannResult b = riemann_sum(s, {10, 10, 10}, o);
  CHECK(std::abs(a.value - b.value) <= 1e-10 * std::abs(a.value));
  RiemannOptions tiny;
  tiny.max_points = 1000;
  tiny.rtol = 1e-12;
  CHECK_FALSE(riemann_sum(s, {10, 10, 10}, tiny).converged);
}

TEST_CASE("anisotropic counterexample keeps a positive excess") {
  const auto rows = counterexample_study({8, 16});
  for (const auto& r : rows) {
    CHECK(r.L[0] == r.L23 * r.L23);
    CHECK(r.lower_bound > 0);
    CHECK(r.excess >= r.lower_bound);
  }
  CHECK(rows[1].lower_bound == doctest::Approx(rows[0].lower_bound).epsilon(1e-12));
  CHECK(rows[1].excess > rows[0].excess);
}

TEST_CASE("screened target and mollified sum") {
  const ParticlePositions x = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  CHECK(screened_coulomb_target(x, {1, 1}, 0.25) == doctest::Approx(std::erf(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(mollified_coulomb({Vec3(0, 0, 0), Vec3(0, 0, 0)}, {1, 1}, {10, 10, 10}, 0.5),
                  ConfigError);
  // wide mollifier: the lattice sum is already close to its screened target
  const double v = mollified_coulomb(x, {1, 1}, {20, 20, 20}, 1.0);
  CHECK(v == doctest::Approx(screened_coulomb_target(x, {1, 1}, 1.0)).epsilon(0.1));
  CHECK(mollified_coulomb(x, {1, -1}, {20, 20, 20}, 1.0) == doctest::Approx(-v).epsilon(1e-12));
  const double b = mollified_coulomb(x, {1, 1}, {20, 20, 20}, 0.5, bump_mollifier());
  CHECK(b > 0);
  CHECK(bump_profile(0.5) == 1.0);
  CHECK(bump_profile(2.5) == 0.0);
  CHECK(bump_profile(1.5) == doctest::Approx(0.5));
}

TEST_CASE("joint refinement moves toward the point-charge limit") {
  const auto rows = coulomb_refinement({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {1, 1}, {5, 10, 20},
                                       {1.0, 0.5, 0.25});
  REQUIRE(rows.size() == 3);
  for (size_t i = 1; i < rows.size(); ++i)
    CHECK(std::abs(rows[i].value - rows[i].limit) < std::abs(rows[i - 1].value - rows[i - 1].limit));
  CHECK(rows[0].limit == doctest::Approx(1.0));
  CHECK_THROWS_AS(coulomb_refinement({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {1, 1}, {5}, {1, 2}), ConfigError);
}
