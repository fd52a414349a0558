#include "fmqed/action.hpp"

#include <algorithm>
#include <cmath>

#include "fmqed/errors.hpp"

namespace fmqed {

Subdivision::Subdivision(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ConfigError("subdivision needs at least two times");
  for (size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw ConfigError("subdivision times must increase strictly");
}

Subdivision Subdivision::uniform(double T, int steps) {
  if (steps < 1 || !(T > 0)) throw ConfigError("uniform subdivision needs T > 0 and steps >= 1");
  std::vector<double> t(steps + 1);
  for (int i = 0; i <= steps; ++i) t[i] = T * i / steps;
  t[steps] = T;
  return Subdivision(std::move(t));
}

double Subdivision::mesh() const {
  double m = 0;
  for (size_t i = 1; i < times_.size(); ++i) m = std::max(m, times_[i] - times_[i - 1]);
  return m;
}

void BrokenPath::validate() const {
  const size_t nv = subdivision.times().size();
  if (x.size() != nv || X.size() != nv)
    throw ConfigError("broken path needs one vertex per subdivision time");
  if (!xi.empty() && xi.size() != nv - 1)
    throw ConfigError("scalar offsets must be given per segment");
}

std::pair<VecX, VecX> BrokenPath::at(double tau) const {
  const auto& t = subdivision.times();
  if (tau < t.front() || tau > t.back()) throw ConfigError("time outside the path");
  for (size_t l = 0; l < t.size(); ++l)
    if (tau == t[l]) return {x[l], X[l]};
  const size_t l = std::upper_bound(t.begin(), t.end(), tau) - t.begin();
  const double w = (t[l] - tau) / (t[l] - t[l - 1]);
  return {x[l] - w * (x[l] - x[l - 1]), X[l] - w * (X[l] - X[l - 1])};
}

AdaptiveOptions action_quadrature() {
  AdaptiveOptions o;
  o.rtol = 1e-10;
  o.atol = 1e-12;
  return o;
}

namespace {

void check_shapes(const Model& model, const VecX& x, const VecX& y, const VecX& X, const VecX& Y) {
  if (x.size() != model.particle_dim() || y.size() != model.particle_dim())
    throw ConfigError("particle coordinates must have length 3n");
  if (X.size() != model.field_dim() || Y.size() != model.field_dim())
    throw ConfigError("field coordinates must have length 4N");
}

double gauge_integral(const Model& model, const VecX& x, const VecX& y, const VecX& X,
                      const VecX& Y) {
  if (!model.coupled()) return 0.0;
  const auto& vp = model.potential();
  const double c = model.config().c_light;
  auto f = [&](double th) {
    const VecX a = X - th * (X - Y);
    double acc = 0;
    for (int j = 0; j < model.n(); ++j) {
      const double e = model.charge(j);
      if (e == 0) continue;
      const Vec3 dx = x.segment<3>(3 * j) - y.segment<3>(3 * j);
      const Vec3 p = x.segment<3>(3 * j) - th * dx;
      acc += e * dx.dot(vp.tilde_A<double>(p, a.data()));
    }
    return acc / c;
  };
  return integrate_adaptive<double>(f, 0.0, 1.0, action_quadrature());
}

}  // namespace

SegmentTerms segment_action_terms(const Model& model, double t, double s, const VecX& x,
                                  const VecX& y, const VecX& X, const VecX& Y) {
  if (!(t > s)) throw ConfigError("segment action requires t > s");
  check_shapes(model, x, y, X, Y);
  const double rho = t - s;
  SegmentTerms r;
  for (int j = 0; j < model.n(); ++j)
    r.kinetic += model.mass(j) * (x.segment<3>(3 * j) - y.segment<3>(3 * j)).squaredNorm();
  r.kinetic /= 2 * rho;
  if (model.n() >= 2 && model.config().coupled()) {
    auto f = [&](double th) { return model.coulomb().value(x - th * (x - y)); };
    r.coulomb = -rho * integrate_adaptive<double>(f, 0.0, 1.0, action_quadrature());
  }
  r.gauge = gauge_integral(model, x, y, X, Y);
  r.field_kinetic = (X - Y).squaredNorm() / (2 * model.volume() * rho);
  auto v2 = [&](double th) {
    const VecX a = X - th * (X - Y);
    return potential_V2<double>(a.data(), model.omega(), model.config());
  };
  if (model.field_dim() > 0)
    r.field_potential = -rho * integrate_adaptive<double>(v2, 0.0, 1.0, action_quadrature());
  return r;
}

double segment_action(const Model& model, double t, double s, const VecX& x, const VecX& y,
                      const VecX& X, const VecX& Y) {
  return segment_action_terms(model, t, s, x, y, X, Y).total();
}

double broken_action(const Model& model, const BrokenPath& path) {
  path.validate();
  const auto& t = path.subdivision.times();
  NeumaierSum<double> acc;
  for (size_t l = 1; l < t.size(); ++l) {
    if (path.xi.empty())
      acc.add(segment_action(model, t[l], t[l - 1], path.x[l], path.x[l - 1], path.X[l],
                             path.X[l - 1]));
    else
      acc.add(phi_path_action(model, t[l], t[l - 1], path.x[l], path.x[l - 1], path.X[l],
                              path.X[l - 1], path.xi[l - 1]));
  }
  return acc.value();
}

IdentityCheck constraint_identity_check(const std::vector<Vec3>& x,
                                        const std::vector<double>& charges, const Vec3& k) {
  const double k2 = k.squaredNorm();
  if (!(k2 > 0)) throw ConfigError("wave vector must be nonzero");
  if (charges.size() != x.size()) throw ConfigError("one charge per particle required");
  double rho[2] = {0, 0}, esq = 0;
  for (size_t j = 0; j < x.size(); ++j) {
    rho[0] += charges[j] * std::cos(k.dot(x[j]));
    rho[1] += charges[j] * std::sin(k.dot(x[j]));
    esq += charges[j] * charges[j];
  }
  IdentityCheck r{0, 0};
  for (int i = 0; i < 2; ++i) {
    const double phi = 4 * kPi * rho[i] / k2;
    r.lhs += k2 * phi * phi - 8 * kPi * rho[i] * phi;
  }
  r.lhs += 16 * kPi * kPi * esq / k2;
  double pairs = 0;
  for (size_t j = 0; j < x.size(); ++j)
    for (size_t l = 0; l < x.size(); ++l)
      if (j != l) pairs += charges[j] * charges[l] * std::cos(k.dot(x[j] - x[l]));
  r.rhs = -16 * kPi * kPi / k2 * pairs;
  return r;
}

double phi_path_action(const Model& model, double t, double s, const VecX& x, const VecX& y,
                       const VecX& X, const VecX& Y, const VecX& xi) {
  const ModeSet& m1 = model.lambda1();
  if (xi.size() != 2 * m1.N()) throw ConfigError("scalar offsets need 2 N_1 entries");
  SegmentTerms r = segment_action_terms(model, t, s, x, y, X, Y);
  const double rho = t - s;
  const double V = model.volume();
  // (1/(8 pi |V|)) sum_{k in Lambda_1} [sum_i (|k|^2 phi_i^2 - 8 pi rho_i phi_i) + 16 pi^2 sum e^2/|k|^2]
  auto f = [&](double th) {
    const VecX q = x - th * (x - y);
    NeumaierSum<double> acc;
    double esq = 0;
    for (int j = 0; j < model.n(); ++j) esq += model.charge(j) * model.charge(j);
    for (const auto& w : m1.lambda) {
      const auto [idx, sign] = m1.locate(w.s);
      const double xi1 = xi[2 * idx], xi2 = sign * xi[2 * idx + 1];
      double r1 = 0, r2 = 0;
      for (int j = 0; j < model.n(); ++j) {
        const double ph = w.k.dot(q.segment<3>(3 * j));
        r1 += model.charge(j) * std::cos(ph);
        r2 += model.charge(j) * std::sin(ph);
      }
      const double k2 = w.k.squaredNorm();
      const double p1 = xi1 + 4 * kPi * r1 / k2, p2 = xi2 + 4 * kPi * r2 / k2;
      acc.add(k2 * p1 * p1 - 8 * kPi * r1 * p1 + k2 * p2 * p2 - 8 * kPi * r2 * p2 +
              16 * kPi * kPi * esq / k2);
    }
    return acc.value() / (8 * kPi * V);
  };
  r.coulomb = rho * integrate_adaptive<double>(f, 0.0, 1.0, action_quadrature());
  return r.total();
}

double phi_path_action_closed(const Model& model, double t, double s, const VecX& x,
                              const VecX& y, const VecX& X, const VecX& Y, const VecX& xi) {
  const ModeSet& m1 = model.lambda1();
  if (xi.size() != 2 * m1.N()) throw ConfigError("scalar offsets need 2 N_1 entries");
  double extra = 0;
  for (int q = 0; q < m1.N(); ++q)
    extra += m1.lambda_prime[q].k.squaredNorm() * (xi[2 * q] * xi[2 * q] + xi[2 * q + 1] * xi[2 * q + 1]);
  return segment_action(model, t, s, x, y, X, Y) + (t - s) / (4 * kPi * model.volume()) * extra;
}

double external_field_terms(const Model& model, double t, double s, const VecX& x,
                            const VecX& y, const ExternalVector& A_ex,
                            const ExternalScalar& phi_ex) {
  if (!(t > s)) throw ConfigError("segment action requires t > s");
  const double c = model.config().c_light;
  auto f = [&](double th) {
    const double tau = t - th * (t - s);
    double acc = 0;
    for (int j = 0; j < model.n(); ++j) {
      const double e = model.charge(j);
      if (e == 0) continue;
      const Vec3 dx = x.segment<3>(3 * j) - y.segment<3>(3 * j);
      const Vec3 p = x.segment<3>(3 * j) - th * dx;
      if (A_ex) acc += e / c * dx.dot(A_ex(tau, p));
      if (phi_ex) acc -= e * (t - s) * phi_ex(tau, p);
    }
    return acc;
  };
  return integrate_adaptive<double>(f, 0.0, 1.0, action_quadrature());
}

}  // namespace fmqed
