#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "fmqed/errors.hpp"
#include "fmqed/field.hpp"
#include "fmqed/lattice.hpp"
#include "fmqed/model.hpp"

using namespace fmqed;

namespace {

struct Setup {
  SimulationConfig config;
  ModeSet modes;
  PolarizationFrame frame;
};

Setup setup(int M, std::array<double, 3> L = {2 * kPi, 2 * kPi, 2 * kPi}) {
  Setup s;
  s.config.L = L;
  s.config.M = {M, M, M};
  s.modes = build_mode_set(s.config, 3);
  s.frame = build_polarization(s.modes);
  return s;
}

FieldVector random_field(int N, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  FieldVector a(N);
  for (int f = 0; f < a.size(); ++f) a.values[f] = g(rng);
  return a;
}

// complex Fourier form: sum over the full set of a_lk e^{ik.x} e_l(k) with
// a_lk = (a1 - i a2)/sqrt2 from the parity extension
Eigen::Vector3cd complex_form_A(const Vec3& x, const FieldVector& a, const Setup& s) {
  const FullCoefficients full = extend_parity(a, s.modes);
  Eigen::Vector3cd acc = Eigen::Vector3cd::Zero();
  for (size_t q = 0; q < s.modes.lambda.size(); ++q) {
    const WaveVector& w = s.modes.lambda[q];
    const Polarization p = s.frame.at(s.modes, w.s);
    const cplx ph = std::exp(cplx(0, w.k.dot(x)));
    for (int l = 1; l <= 2; ++l) {
      const cplx alk = cplx(full[q][l - 1][0], -full[q][l - 1][1]) / std::sqrt(2.0);
      acc += (alk * ph) * p[l].cast<cplx>();
    }
  }
  return acc * (std::sqrt(4 * kPi) / s.config.volume() * s.config.c_light);
}

}  // namespace

TEST_CASE("flat index map is a bijection") {
  const int N = 7;
  std::vector<int> seen(4 * N, 0);
  for (int k = 0; k < N; ++k)
    for (int l = 1; l <= 2; ++l)
      for (int i = 1; i <= 2; ++i) {
        const int f = FieldVector::flat(l, k, i);
        REQUIRE(f >= 0);
        REQUIRE(f < 4 * N);
        ++seen[f];
        const FieldIndex id = FieldVector::unflat(f);
        CHECK(id.l == l);
        CHECK(id.k == k);
        CHECK(id.i == i);
      }
  for (int c : seen) CHECK(c == 1);
  CHECK_THROWS_AS(FieldVector(3, VecX::Zero(5)), ConfigError);
}

TEST_CASE("parity extension of coefficients") {
  const Setup s = setup(1);
  FieldVector a(s.modes.N());
  a(1, 0, 1) = 1.0;
  a(1, 0, 2) = 1.0;
  const FullCoefficients full = extend_parity(a, s.modes);
  const int N = s.modes.N();
  CHECK(full[N][0][0] == -1.0);
  CHECK(full[N][0][1] == +1.0);
  CHECK(s.modes.lambda[N].s == Vec3i(-s.modes.lambda[0].s));
  const FullCoefficients zero = extend_parity(FieldVector(N), s.modes);
  for (const auto& c : zero)
    for (const auto& l : c)
      for (double v : l) CHECK(v == 0.0);
}

TEST_CASE("single coordinate gives a cosine along e1") {
  const Setup s = setup(1, {2.0, 3.0, 5.0});
  FieldVector a(s.modes.N());
  const int k = 4;
  a(1, k, 1) = 1.0;
  const WaveVector& w = s.modes.lambda_prime[k];
  const Vec3 e1 = s.frame.prime(k).e1;
  for (const Vec3& x : {Vec3(0.1, 0.2, 0.3), Vec3(-1.0, 0.7, 2.2)}) {
    const Vec3 A = reconstruct_A(x, a, s.modes, s.frame, s.config);
    const Vec3 expect = std::sqrt(8 * kPi) / s.config.volume() * std::cos(w.k.dot(x)) * e1;
    CHECK((A - expect).norm() < 1e-14);
  }
  CHECK(reconstruct_A(Vec3(0.3, 0.3, 0.3), FieldVector(s.modes.N()), s.modes, s.frame, s.config)
            .norm() == 0.0);
}

TEST_CASE("real form agrees with the complex Fourier form, which is real") {
  const Setup s = setup(2, {2.0, 3.0, 5.0});
  const FieldVector a = random_field(s.modes.N(), 11);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int t = 0; t < 10; ++t) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const Eigen::Vector3cd z = complex_form_A(x, a, s);
    const Vec3 A = reconstruct_A(x, a, s.modes, s.frame, s.config);
    CHECK(z.imag().norm() < 1e-12);
    CHECK((z.real() - A).norm() < 1e-12 * std::max(1.0, A.norm()));
  }
}

TEST_CASE("Coulomb gauge and periodicity of A") {
  const Setup s = setup(2, {2.0, 3.0, 5.0});
  const FieldVector a = random_field(s.modes.N(), 5);
  const double h = 1e-4;
  double amax = 0, dmax = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int l = 0; l < 5; ++l) {
        const Vec3 x(0.4 * i, 0.6 * j, l * 1.0);
        amax = std::max(amax, reconstruct_A(x, a, s.modes, s.frame, s.config).cwiseAbs().maxCoeff());
        double div = 0;
        for (int m = 0; m < 3; ++m) {
          Vec3 xp = x, xm = x;
          xp[m] += h;
          xm[m] -= h;
          div += (reconstruct_A(xp, a, s.modes, s.frame, s.config)[m] -
                  reconstruct_A(xm, a, s.modes, s.frame, s.config)[m]) / (2 * h);
        }
        dmax = std::max(dmax, std::abs(div));
      }
  CHECK(dmax <= 1e-6 * amax);
  const Vec3 x(0.3, -0.2, 1.1);
  const Vec3 A0 = reconstruct_A(x, a, s.modes, s.frame, s.config);
  for (int m = 0; m < 3; ++m) {
    Vec3 y = x;
    y[m] += s.config.L[m];
    CHECK((reconstruct_A(y, a, s.modes, s.frame, s.config) - A0).norm() < 1e-12 * A0.norm() + 1e-13);
  }
}

TEST_CASE("mollifiers") {
  MollifierPair m;
  m.sigma = 10;
  CHECK(m.psi(0.1) == doctest::Approx(0.09999667).epsilon(1e-8));
  for (double t : {0.0, 0.3, 2.0, 50.0, 1e4}) {
    CHECK(m.psi(-t) == -m.psi(t));
    CHECK(std::abs(m.psi(t)) <= m.sigma);
  }
  for (double t : {0.5, 3.0, 20.0}) {
    const double h = 1e-6;
    CHECK(m.dpsi(t) == doctest::Approx((m.psi(t + h) - m.psi(t - h)) / (2 * h)).epsilon(1e-8));
    CHECK(m.dpsi(2 * t) <= m.dpsi(t));
  }
  m.width = 3.0;
  CHECK(m.g(Vec3(0, 0, 0)) == 1.0);
  CHECK(m.g(Vec3(3, 0, 0)) == doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("mollified potential: oddness and g(0) = 1") {
  Setup s = setup(1);
  s.config.sigma_psi = 10;
  s.config.width_g = 4.0;
  FieldVector a = random_field(s.modes.N(), 9);
  const Vec3 At = reconstruct_tilde_A(Vec3::Zero(), a, s.modes, s.frame, s.config);
  FieldVector psi_a = a;
  for (int f = 0; f < a.size(); ++f) psi_a.values[f] = 10 * std::tanh(a.values[f] / 10);
  const Vec3 A = reconstruct_A(Vec3::Zero(), psi_a, s.modes, s.frame, s.config);
  CHECK((At - A).norm() < 1e-13);
  FieldVector neg = a;
  neg.values = -a.values;
  const Vec3 x(0.3, 1.0, -0.5);
  CHECK((reconstruct_tilde_A(x, neg, s.modes, s.frame, s.config) +
         reconstruct_tilde_A(x, a, s.modes, s.frame, s.config)).norm() < 1e-14);
}

TEST_CASE("field potential V2") {
  SimulationConfig c;
  c.mode_select = {Vec3i(1, 0, 0)};
  const ModeSet m = build_mode_set(c, 3);
  FieldVector a(m.N());
  CHECK(potential_V2(a, m, c) == doctest::Approx(-2.0).epsilon(1e-15));
  const double kk = m.lambda_prime[0].k.norm();
  a(1, 0, 1) = std::sqrt(c.volume() * c.hbar / (c.c_light * kk));
  CHECK(potential_V2(a, m, c) == doctest::Approx(-1.5).epsilon(1e-14));

  const Setup s = setup(1);
  const FieldVector r = random_field(s.modes.N(), 21);
  FieldVector r2 = r;
  r2.values *= 2;
  const double base = potential_V2(FieldVector(s.modes.N()), s.modes, s.config);
  const double q1 = potential_V2(r, s.modes, s.config) - base;
  const double q2 = potential_V2(r2, s.modes, s.config) - base;
  CHECK(q2 == doctest::Approx(4 * q1).epsilon(1e-13));
  CHECK(q1 > 0);
  double expect = 0;
  for (const auto& w : s.modes.lambda_prime) expect -= 4 * s.config.hbar * s.config.c_light * w.k.norm() / 2;
  CHECK(base == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("field CSV carries an index legend") {
  const Setup s = setup(1);
  FieldVector a(s.modes.N());
  a.values[5] = 0.25;
  std::ostringstream os;
  write_field_csv(os, a, s.modes);
  const std::string t = os.str();
  CHECK(t.rfind("flat,l,k_index,i,s1,s2,s3,value\n", 0) == 0);
  CHECK(t.find("\n5,1,1,2,") != std::string::npos);
}
