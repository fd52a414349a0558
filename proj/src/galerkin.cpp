#include "fmqed/galerkin.hpp"

#include <cmath>
#include <string>

#include "fmqed/errors.hpp"
#include "fmqed/io.hpp"
#include "fmqed/parallel.hpp"
#include "fmqed/quadrature.hpp"

namespace fmqed {

namespace {

const cplx I(0.0, 1.0);
const cplx kRot = std::polar(1.0, kPi / 4);

// B[(i, j), (n', n)] for one field coordinate: output projection at the
// Gauss-Hermite node x_i, input Hermite function at the rotated point
// Y_ij = X_i - c_f e^{i pi/4} v_j, with the free-field phase of the segment.
struct FieldTable {
  int nx = 0, ny = 0, C = 0;
  VecXc X;  // output points (real)
  MatXc Y;  // nx x ny rotated input points
  MatXc B;  // (nx ny) x (C C), column n' C + n
};

FieldTable field_table(double omega, double volume, double rho, double hbar, int cap, int nx,
                       int ny, double eps) {
  const QuadRule& out = gauss_hermite(nx);
  const QuadRule& rot = gauss_hermite(ny);
  const double ell = std::sqrt(hbar * volume / omega);
  const double cf = std::sqrt(2 * volume * hbar * rho);
  const int C = cap + 1;
  FieldTable t;
  t.nx = nx;
  t.ny = ny;
  t.C = C;
  t.X.resize(nx);
  t.Y.resize(nx, ny);
  t.B.resize(static_cast<long>(nx) * ny, C * C);
  std::vector<double> hout(C);
  std::vector<cplx> hin(C);
  for (int i = 0; i < nx; ++i) {
    const double X = ell * out.x[i];
    t.X[i] = X;
    hermite_functions(out.x[i], cap, hout.data());
    for (int j = 0; j < ny; ++j) {
      const double v = rot.x[j];
      const cplx Y = X - cf * kRot * v;
      t.Y(i, j) = Y;
      hermite_functions<cplx>(Y / ell, cap, hin.data());
      const cplx phase = -I * rho / hbar * omega * omega * (X * X + X * Y + Y * Y) /
                             (6.0 * volume) +
                         I * (rho * omega / 2) - I * eps * eps * v * v;
      const cplx pre = out.w_scaled[i] * rot.w[j] / std::sqrt(kPi) * std::exp(phase);
      const long r = static_cast<long>(i) * ny + j;
      for (int np = 0; np < C; ++np)
        for (int n = 0; n < C; ++n) t.B(r, np * C + n) = pre * hout[np] * hin[n];
    }
  }
  return t;
}

MatXc dense_kron(const MatXc& a, const MatXc& b) {
  MatXc out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// R[(n'1 C + n1), (n'2 C + n2)] -> I[(n'1 + C n'2), (n1 + C n2)]
MatXc reshape_pair(const MatXc& R, int C) {
  MatXc out(C * C, C * C);
  for (int a1 = 0; a1 < C; ++a1)
    for (int b1 = 0; b1 < C; ++b1)
      for (int a2 = 0; a2 < C; ++a2)
        for (int b2 = 0; b2 < C; ++b2) out(a1 + C * a2, b1 + C * b2) = R(a1 * C + b1, a2 * C + b2);
  return out;
}

}  // namespace

MatXc field_step_matrix(double omega, double volume, double rho, double hbar, int cap,
                        int out_nodes, int rot_nodes, double eps) {
  const FieldTable t = field_table(omega, volume, rho, hbar, cap, out_nodes, rot_nodes, eps);
  const int C = t.C;
  const VecXc colsum = t.B.colwise().sum().transpose();
  MatXc M(C, C);
  for (int np = 0; np < C; ++np)
    for (int n = 0; n < C; ++n) M(np, n) = colsum[np * C + n];
  return M;
}

GalerkinStepper::GalerkinStepper(const Model& model, GalerkinOptions opt)
    : model_(model), opt_(std::move(opt)) {
  if (opt_.cap < 0 || opt_.P < 0) throw ConfigError("galerkin cap and P must be non-negative");
  if (model.n() > 1) throw ConfigError("galerkin backend supports at most one particle");
  ParticleBasis pb = ParticleBasis::none();
  if (model.n() == 1) {
    if (model.lambda3().N() != 1 || model.lambda2().N() > 1)
      throw ConfigError("galerkin backend with a particle needs exactly one field mode");
    if (!model.potential().mollifiers().g_is_one())
      throw ConfigError("galerkin backend with a particle needs width_g = inf");
    const Vec3 k = model.lambda3().lambda_prime[0].k;
    pb = ParticleBasis::sector(model.config(), opt_.q0, k, opt_.P);
  }
  auto basis = std::make_shared<ProductBasis>(make_product_basis(model, pb, opt_.cap));
  if (basis->field.dim() > 4096) throw ConfigError("galerkin field basis exceeds 4096 states");
  basis_ = basis;
}

const MatXc& GalerkinStepper::step_matrix(double rho) {
  if (!(rho > 0)) throw ConfigError("step length must be positive");
  auto it = cache_.find(rho);
  if (it != cache_.end()) return it->second;
  MatXc M;
  if (opt_.eps_levels.empty()) {
    M = assemble(rho, 0.0);
  } else {
    for (size_t i = 1; i < opt_.eps_levels.size(); ++i)
      if (std::abs(opt_.eps_levels[i] * 2 - opt_.eps_levels[i - 1]) > 1e-12)
        throw ConfigError("regularization levels must halve");
    std::vector<MatXc> vals;
    for (double e : opt_.eps_levels) vals.push_back(assemble(rho, e));
    M = richardson<MatXc>(vals, 2.0, 2.0, 2.0);
  }
  if (!M.allFinite())
    throw InvariantViolation("one-step matrix is not finite at rho = " + format_double(rho) +
                             "; the rotated contour leaves the region where the kernel is bounded");
  return cache_.emplace(rho, std::move(M)).first->second;
}

StateVector GalerkinStepper::step(const StateVector& f, double rho) {
  if (f.c.size() != dim()) throw ConfigError("state does not match the galerkin basis");
  return {basis_, step_matrix(rho) * f.c};
}

MatXc GalerkinStepper::assemble(double rho, double eps) {
  return model_.n() == 0 ? assemble_field_only(rho, eps) : assemble_coupled(rho, eps);
}

MatXc GalerkinStepper::assemble_field_only(double rho, double eps) {
  const SimulationConfig& cfg = model_.config();
  MatXc M = MatXc::Identity(1, 1);
  for (int v = 0; v < model_.field_dim(); ++v) {
    const MatXc Cv = field_step_matrix(model_.omega()[v], model_.volume(), rho, cfg.hbar, opt_.cap,
                                       opt_.field_nodes, opt_.field_rotated, eps);
    evaluations_ += static_cast<long long>(opt_.field_nodes) * opt_.field_rotated;
    M = dense_kron(Cv, M);
  }
  return M;
}

MatXc GalerkinStepper::assemble_coupled(double rho, double eps) {
  const SimulationConfig& cfg = model_.config();
  const double hbar = cfg.hbar, c = cfg.c_light;
  const double m = model_.mass(0), e = model_.charge(0);
  const double V = model_.volume();
  const ModeSet& m3 = model_.lambda3();
  const Vec3 k = m3.lambda_prime[0].k;
  const double kn = k.norm();
  const Vec3 khat = k / kn;
  const double q_par = opt_.q0.dot(khat);
  const Vec3 q_perp = opt_.q0 - q_par * khat;
  const double omega = model_.omega()[0];
  const int C = opt_.cap + 1;
  const int P = opt_.P;
  const int np_ = 2 * P + 1;
  const long Fd = basis_->field.dim();

  const auto& terms = model_.potential().terms();
  const MollifierPair& moll = model_.potential().mollifiers();
  const double kappa = model_.potential().prefactor();
  const bool coupled = model_.coupled() && e != 0.0;
  if (coupled) {
    if (terms.size() != 2 || terms[0].var_cos != 0 || terms[0].var_sin != 1 ||
        terms[1].var_cos != 2 || terms[1].var_sin != 3)
      throw ConfigError("galerkin backend expects one coupled mode with two polarizations");
  }
  double q_l[2] = {0, 0};
  if (coupled)
    for (int l = 0; l < 2; ++l) q_l[l] = q_perp.dot(terms[l].e);

  const FieldTable ft = field_table(omega, V, rho, hbar, opt_.cap, opt_.field_nodes,
                                    opt_.field_rotated, eps);
  const long R = static_cast<long>(ft.nx) * ft.ny;
  const double cf = std::sqrt(2 * V * hbar * rho);
  const double cp = std::sqrt(2 * hbar * rho / m);

  const QuadRule& gt = gauss_legendre(opt_.theta_nodes);
  const int nt = opt_.theta_nodes;
  VecX th(nt), wt(nt);
  for (int t = 0; t < nt; ++t) {
    th[t] = 0.5 * (gt.x[t] + 1);
    wt[t] = 0.5 * gt.w[t];
  }
  // psi along the rotated field segment; identical for all four coordinates
  MatXc psitab(R, nt);
  if (coupled) {
    const double vmax = std::abs(gauss_hermite(opt_.field_rotated).x[0]);
    if (cf * vmax / std::sqrt(2.0) > 0.9 * moll.sigma * kPi / 2)
      throw ConfigError("sigma_psi too small: the rotated field contour reaches the poles of psi (need sigma_psi > " +
                        format_double(cf * vmax / std::sqrt(2.0) / (0.9 * kPi / 2)) + ")");
    for (int i = 0; i < ft.nx; ++i)
      for (int j = 0; j < ft.ny; ++j) {
        const cplx dX = ft.X[i] - ft.Y(i, j);
        for (int t = 0; t < nt; ++t) psitab(i * ft.ny + j, t) = moll.psi<cplx>(ft.X[i] - th[t] * dX);
      }
  }

  const QuadRule& gu = gauss_hermite(opt_.particle_rotated);
  const int nu = opt_.particle_rotated;
  const int na = opt_.zeta_points > 0 ? opt_.zeta_points : 4 * P + 8;
  const double period = 2 * kPi / kn;
  auto ep = [&](int p, cplx zeta) { return std::exp(I * (q_par + (p - P) * kn) * zeta); };

  // uncoupled field operator: product of the per-coordinate sums
  MatXc W0;
  if (!coupled) {
    const VecXc colsum = ft.B.colwise().sum().transpose();
    MatXc Cv(C, C);
    for (int a = 0; a < C; ++a)
      for (int b = 0; b < C; ++b) Cv(a, b) = colsum[a * C + b];
    W0 = MatXc::Identity(1, 1);
    for (int v = 0; v < model_.field_dim(); ++v) W0 = dense_kron(Cv, W0);
  }
  const double beta = rho / (2 * m * hbar);

  // S[a][p]: sum over rotated particle nodes of the field operator times e_p
  std::vector<std::vector<MatXc>> S(na);
  parallel_for(na, opt_.jobs, [&](long a) {
    const double zeta = -period / 2 + period * a / na;
    std::vector<MatXc>& Sa = S[a];
    Sa.assign(np_, MatXc::Zero(Fd, Fd));
    VecXc cs(nt), sn(nt), A1(R), A2(R);
    MatXc E(R, R), EB(R, C * C), Rm(C * C, C * C);
    for (int b = 0; b < nu; ++b) {
      const double u = gu.x[b];
      const cplx eta = zeta - cp * kRot * u;
      const cplx coef = gu.w[b] / std::sqrt(kPi) * std::exp(-I * eps * eps * u * u);
      MatXc W;
      if (coupled) {
        for (int t = 0; t < nt; ++t) {
          const cplx zt = zeta - th[t] * (zeta - eta);
          cs[t] = wt[t] * std::cos(kn * zt);
          sn[t] = wt[t] * std::sin(kn * zt);
        }
        A1 = kappa * (psitab * cs);
        A2 = kappa * (psitab * sn);
        MatXc Il[2];
        for (int l = 0; l < 2; ++l) {
          const cplx shift = hbar * q_l[l];
          for (long cix = 0; cix < R; ++cix)
            for (long rix = 0; rix < R; ++rix) {
              const cplx bb = e / c * (A1[rix] + A2[cix]) - shift;
              E(rix, cix) = std::exp(-I * beta * bb * bb);
            }
          EB.noalias() = E * ft.B;
          Rm.noalias() = ft.B.transpose() * EB;
          Il[l] = reshape_pair(Rm, C);
        }
        W = dense_kron(Il[1], Il[0]);
      } else {
        const double b2 = hbar * hbar * q_perp.squaredNorm();
        W = W0 * std::exp(-I * beta * b2);
      }
      for (int p = 0; p < np_; ++p) Sa[p] += (coef * ep(p, eta)) * W;
    }
  });
  evaluations_ += static_cast<long long>(na) * nu * (coupled ? 2 * R * R : 1);

  MatXc M = MatXc::Zero(np_ * Fd, np_ * Fd);
  for (int a = 0; a < na; ++a) {
    const double zeta = -period / 2 + period * a / na;
    for (int pp = 0; pp < np_; ++pp) {
      const cplx w = std::conj(ep(pp, zeta)) / double(na);
      for (int p = 0; p < np_; ++p) M.block(pp * Fd, p * Fd, Fd, Fd) += w * S[a][p];
    }
  }
  return M;
}

}  // namespace fmqed
