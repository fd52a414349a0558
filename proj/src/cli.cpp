#include "fmqed/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "fmqed/action.hpp"
#include "fmqed/coulomb.hpp"
#include "fmqed/errors.hpp"
#include "fmqed/field.hpp"
#include "fmqed/fock.hpp"
#include "fmqed/galerkin.hpp"
#include "fmqed/gaussian_state.hpp"
#include "fmqed/io.hpp"
#include "fmqed/lattice.hpp"
#include "fmqed/model.hpp"
#include "fmqed/propagator.hpp"
#include "fmqed/quadrature.hpp"

namespace fmqed {

using nlohmann::json;
namespace fs = std::filesystem;

const char* version_string() { return FMQED_VERSION; }

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {
      "modes",    "coulomb-limit", "riemann",   "fock-spectrum", "action-eval",
      "propagate", "residual",     "rho-star", "g-equivalence"};
  return names;
}

json RunManifest::to_json() const {
  json j;
  j["tool"] = "fmqed";
  j["version"] = version;
  j["subcommand"] = subcommand;
  j["config_path"] = config_path;
  j["config"] = config;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["seconds"] = seconds;
  j["outputs"] = outputs;
  j["summary"] = summary;
  return j;
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  try {
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.jobs = j.value("jobs", 1);
    m.version = j.value("version", "");
    m.config_path = j.value("config_path", "");
    m.seconds = j.value("seconds", 0.0);
    m.outputs = j.value("outputs", std::vector<std::string>{});
    m.summary = j.value("summary", json::object());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

namespace {

// ---------------------------------------------------------------- helpers

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': '" + tok + "' is not a number");
    }
  }
  return out;
}

// ';'-separated rows of whitespace-separated numbers
std::vector<VecX> get_rows(const KeyValueFile& kv, const std::string& key) {
  std::vector<VecX> rows;
  if (!kv.has(key)) return rows;
  std::istringstream is(kv.raw(key));
  std::string part;
  while (std::getline(is, part, ';')) {
    const auto v = parse_list(key, part);
    if (v.empty()) continue;
    rows.push_back(Eigen::Map<const VecX>(v.data(), static_cast<long>(v.size())));
  }
  return rows;
}

std::vector<int> get_ints(const KeyValueFile& kv, const std::string& key,
                          const std::vector<int>& fallback) {
  if (!kv.has(key)) return fallback;
  std::vector<int> out;
  for (double d : kv.get_doubles(key, {})) {
    if (d != std::floor(d)) throw ConfigError("key '" + key + "' needs integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

Vec3 get_vec3(const KeyValueFile& kv, const std::string& key, const Vec3& fallback) {
  if (!kv.has(key)) return fallback;
  const auto v = kv.get_doubles(key, {});
  if (v.size() != 3) throw ConfigError("key '" + key + "' needs 3 values");
  return {v[0], v[1], v[2]};
}

class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
  void csv(const std::string& name, const CsvTable& t) {
    t.write_file(path(name));
    files_.push_back(name);
  }
  void csv(const std::string& name, const std::function<void(std::ostream&)>& writer) {
    std::ofstream os(path(name), std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path(name));
    writer(os);
    if (!os) throw ConfigError("write failed for " + path(name));
    files_.push_back(name);
  }
  void json_file(const std::string& name, const json& j) {
    write_json_file(path(name), j);
    files_.push_back(name);
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }
  std::string dir_;
  std::vector<std::string> files_;
};

struct Context {
  const KeyValueFile& kv;
  const SimulationConfig& config;
  const RunOptions& opt;
  Outputs& out;
  json& summary;
};

double min_omega(const Model& m) {
  if (m.field_dim() == 0) throw ConfigError("the study needs a nonempty free-field mode set");
  return m.omega().minCoeff();
}

// Gaussian state with field coordinate 'shift_var' displaced by 'shift' lengths
GaussianState study_gaussian(const Model& model, const KeyValueFile& kv, const std::string& pfx) {
  const int d = model.particle_dim() + model.field_dim();
  VecX center = VecX::Zero(d), wave = VecX::Zero(d);
  const std::string state = kv.get_string(pfx + ".state", "coherent");
  if (state != "vacuum" && state != "coherent")
    throw ConfigError("key '" + pfx + ".state' must be vacuum or coherent");
  if (state == "coherent" && model.field_dim() > 0) {
    const int v = kv.get_int(pfx + ".shift_variable", 0);
    if (v < 0 || v >= model.field_dim()) throw ConfigError("shift_variable out of range");
    const double ell = std::sqrt(model.config().hbar * model.volume() / model.omega()[v]);
    center[model.particle_dim() + v] = kv.get_double(pfx + ".shift", 1.0) * ell;
  }
  return make_gaussian(model, center, wave, kv.get_double(pfx + ".particle_width", 1.0));
}

GalerkinOptions galerkin_options(const KeyValueFile& kv, int jobs) {
  GalerkinOptions g;
  g.P = kv.get_int("galerkin.P", g.P);
  g.cap = kv.get_int("galerkin.cap", g.cap);
  g.q0 = get_vec3(kv, "galerkin.q0", g.q0);
  g.field_nodes = kv.get_int("galerkin.field_nodes", g.field_nodes);
  g.field_rotated = kv.get_int("galerkin.field_rotated", g.field_rotated);
  g.particle_rotated = kv.get_int("galerkin.particle_rotated", g.particle_rotated);
  g.theta_nodes = kv.get_int("galerkin.theta_nodes", g.theta_nodes);
  g.zeta_points = kv.get_int("galerkin.zeta_points", g.zeta_points);
  g.eps_levels = kv.get_doubles("galerkin.eps_levels", {});
  g.jobs = jobs;
  return g;
}

void add_convergence(Context& c, const std::string& name, const ConvergenceStudy& s, double T) {
  CsvTable t({"steps", "mesh", "error", "norm_ratio"});
  for (const auto& r : s.rows) t.row() << r.steps << r.mesh << r.error << r.norm_ratio;
  c.out.csv(name, t);
  c.summary["order"] = s.order;
  c.summary["monotone"] = s.monotone;
  c.summary["final_error"] = s.rows.empty() ? 0.0 : s.rows.back().error;
  c.summary["growth_K"] = fit_growth(s.rows, T);
  c.summary["T"] = T;
}

// ---------------------------------------------------------------- studies

void study_modes(Context& c) {
  const Model model(c.config);
  const ModeSet* sets[3] = {&model.lambda1(), &model.lambda2(), &model.lambda3()};
  json counts;
  for (int j = 0; j < 3; ++j) {
    const PolarizationFrame frame = build_polarization(*sets[j]);
    c.out.csv("modes_" + std::to_string(j + 1) + ".csv",
              [&](std::ostream& os) { write_modes_csv(os, *sets[j], frame); });
    counts["lambda" + std::to_string(j + 1)] = sets[j]->lambda.size();
    counts["lambda" + std::to_string(j + 1) + "_prime"] = sets[j]->N();
  }
  FieldVector a(model.lambda3().N());
  if (c.kv.has("modes.field")) {
    const auto v = c.kv.get_doubles("modes.field", {});
    if (static_cast<int>(v.size()) != a.size())
      throw ConfigError("modes.field needs 4N = " + std::to_string(a.size()) + " values");
    for (int i = 0; i < a.size(); ++i) a.values[i] = v[i];
  }
  c.out.csv("field_legend.csv", [&](std::ostream& os) { write_field_csv(os, a, model.lambda3()); });
  c.summary["counts"] = counts;
  c.summary["field_dim"] = model.field_dim();
}

void study_coulomb(Context& c) {
  auto pos = c.kv.get_points("coulomb.positions");
  if (pos.empty()) pos = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  const auto charges = c.kv.get_doubles("coulomb.charges", std::vector<double>(pos.size(), 1.0));
  if (charges.size() != pos.size()) throw ConfigError("coulomb.charges needs one value per position");
  const auto edges = c.kv.get_doubles("coulomb.edges", {10, 20, 40});
  const auto eps = c.kv.get_doubles("coulomb.eps", {1.0, 0.5, 0.25});
  const auto rows = coulomb_refinement(pos, charges, edges, eps, c.opt.jobs);
  CsvTable t({"L", "eps", "value", "screened_target", "limit", "rel_err_screened", "rel_err_limit"});
  bool monotone = true;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double el = (r.value - r.limit) / std::abs(r.limit);
    t.row() << r.L << r.eps << r.value << r.screened_target << r.limit << r.rel_err_screened << el;
    if (i > 0 && std::abs(r.value - r.limit) >= std::abs(rows[i - 1].value - rows[i - 1].limit))
      monotone = false;
  }
  c.out.csv("coulomb_limit.csv", t);
  c.summary["monotone_toward_limit"] = monotone;
  if (!rows.empty()) c.summary["final_rel_err_screened"] = rows.back().rel_err_screened;

  // fixed eps, growing box: leading error is O(1/L)
  const auto fixed = c.kv.get_doubles("coulomb.fixed_eps_edges", {});
  if (!fixed.empty()) {
    const double e = c.kv.get_double("coulomb.fixed_eps", eps.empty() ? 0.25 : eps.back());
    for (size_t i = 1; i < fixed.size(); ++i)
      if (std::abs(fixed[i] - 2 * fixed[i - 1]) > 1e-12 * fixed[i])
        throw ConfigError("coulomb.fixed_eps_edges must double at each step");
    CsvTable f({"L", "eps", "value", "screened_target", "rel_err_screened"});
    std::vector<double> vals;
    const double target = screened_coulomb_target(pos, charges, e);
    for (double L : fixed) {
      const double v = mollified_coulomb(pos, charges, {L, L, L}, e, gaussian_mollifier(), c.opt.jobs);
      vals.push_back(v);
      f.row() << L << e << v << target << (v - target) / std::abs(target);
    }
    c.out.csv("coulomb_fixed_eps.csv", f);
    const double ex = richardson<double>(vals, 2.0, 1.0, 1.0);
    c.summary["fixed_eps_extrapolated"] = ex;
    c.summary["fixed_eps_extrapolated_rel_err"] = (ex - target) / std::abs(target);
  }
}

void study_riemann(Context& c) {
  const std::string which = c.kv.get_string("riemann.summand", "test");
  LatticeSummand s;
  if (which == "test")
    s = riemann_test_summand();
  else if (which == "counterexample")
    s = counterexample_summand();
  else
    throw ConfigError("riemann.summand must be test or counterexample");
  const auto edges = c.kv.get_doubles("riemann.edges", {15, 30, 60});
  RiemannOptions o;
  o.rtol = c.kv.get_double("riemann.rtol", o.rtol);
  o.jobs = c.opt.jobs;
  CsvTable t({"L", "value", "truncated", "tail_bound", "tail_estimate", "radius", "points",
              "integral", "rel_err"});
  std::vector<double> errs;
  for (double L : edges) {
    const RiemannResult r = riemann_sum(s, {L, L, L}, o);
    if (!r.converged) throw BudgetExhausted("lattice sum did not reach riemann.rtol at L = " + format_double(L));
    const double rel = (r.value - s.analytic_limit) / s.analytic_limit;
    errs.push_back(std::abs(rel));
    t.row() << L << r.value << r.truncated << r.tail_bound << r.tail_estimate << r.radius
            << r.points << s.analytic_limit << rel;
  }
  c.out.csv("riemann.csv", t);
  bool improving = true;
  for (size_t i = 1; i < errs.size(); ++i) improving = improving && errs[i] < errs[i - 1];
  c.summary["summand"] = s.name;
  c.summary["strictly_improving"] = improving;
  if (!errs.empty()) c.summary["final_abs_rel_err"] = errs.back();

  const auto l23 = c.kv.get_doubles("riemann.counterexample_L23", {});
  if (!l23.empty()) {
    const auto rows = counterexample_study(l23, c.opt.jobs);
    CsvTable ct({"L23", "L1", "L2", "L3", "sum", "integral", "excess", "lower_bound"});
    bool persistent = true;
    for (const auto& r : rows) {
      ct.row() << r.L23 << r.L[0] << r.L[1] << r.L[2] << r.sum << r.integral << r.excess
               << r.lower_bound;
      persistent = persistent && r.excess >= r.lower_bound && r.excess > 0;
    }
    c.out.csv("counterexample.csv", ct);
    c.summary["counterexample_persistent_excess"] = persistent;
  }
}

void study_fock(Context& c) {
  const Model model(c.config);
  const int cap = c.kv.get_int("fock.cap", c.config.occupation_cap);
  const long max_dim = c.kv.get_int("fock.max_dim", 4096);
  ParticleBasis pb = model.n() == 0
                         ? ParticleBasis::none()
                         : ParticleBasis::plane_wave_cube(c.config, c.config.particle_cutoff);
  auto basis = std::make_shared<const ProductBasis>(make_product_basis(model, pb, cap));
  if (basis->dim() > max_dim)
    throw BudgetExhausted("basis dimension " + std::to_string(basis->dim()) +
                          " exceeds fock.max_dim = " + std::to_string(max_dim));
  const OperatorMatrix H = model.n() == 0
                               ? OperatorMatrix{basis, h_rad(basis->field, model.lambda3()), true}
                               : assemble_hamiltonian(model, basis);
  const double defect = H.hermiticity_defect();
  if (defect > 1e-10) throw InvariantViolation("Hamiltonian is not hermitian (defect " + format_double(defect) + ")");
  const VecX ev = spectrum(H);
  const double tol = c.kv.get_double("fock.group_tol", 1e-9);
  c.out.csv("spectrum.csv", [&](std::ostream& os) { write_spectrum_csv(os, ev, tol); });
  json sp = sparsity_stats(H.m);
  c.out.json_file("sparsity.json", sp);
  c.summary["dim"] = basis->dim();
  c.summary["ground_energy"] = ev.size() ? ev[0] : 0.0;
  c.summary["hermiticity_defect"] = defect;
}

void study_action(Context& c) {
  const Model model(c.config);
  const auto times = c.kv.get_doubles("action.times", {0.0, 1.0});
  const int nv = static_cast<int>(times.size());
  auto x = get_rows(c.kv, "action.x");
  auto X = get_rows(c.kv, "action.X");
  if (x.empty()) x.assign(nv, VecX::Zero(model.particle_dim()));
  if (X.empty()) X.assign(nv, VecX::Zero(model.field_dim()));
  if (static_cast<int>(x.size()) != nv || static_cast<int>(X.size()) != nv)
    throw ConfigError("action.x and action.X need one ';'-separated row per time");
  for (int i = 0; i < nv; ++i) {
    if (x[i].size() != model.particle_dim())
      throw ConfigError("action.x rows need 3n = " + std::to_string(model.particle_dim()) + " values");
    if (X[i].size() != model.field_dim())
      throw ConfigError("action.X rows need 4N = " + std::to_string(model.field_dim()) + " values");
  }
  BrokenPath path{Subdivision(times), x, X, {}};
  path.validate();
  CsvTable t({"segment", "s", "t", "kinetic", "coulomb", "gauge", "field_kinetic",
              "field_potential", "total"});
  NeumaierSum<double> total;
  for (int i = 0; i + 1 < nv; ++i) {
    const SegmentTerms st =
        segment_action_terms(model, times[i + 1], times[i], x[i + 1], x[i], X[i + 1], X[i]);
    total.add(st.total());
    t.row() << i << times[i] << times[i + 1] << st.kinetic << st.coulomb << st.gauge
            << st.field_kinetic << st.field_potential << st.total();
  }
  c.out.csv("action.csv", t);
  c.summary["total"] = total.value();
  c.summary["broken_action"] = broken_action(model, path);
}

void study_propagate(Context& c) {
  const Model model(c.config);
  const std::string backend = c.kv.get_string("propagate.backend", "analytic");
  if (backend == "analytic") {
    require_analytic_valid(model);
    const double T = c.kv.get_double("propagate.T", kPi / (2 * min_omega(model)));
    const auto steps = get_ints(c.kv, "propagate.steps", {4, 8, 16, 32, 64});
    const GaussianState f = study_gaussian(model, c.kv, "propagate");
    const ConvergenceStudy s = convergence_study(model, f, T, steps);
    add_convergence(c, "convergence.csv", s, T);
    const GaussianState g = compose(model, f, Subdivision::uniform(T, steps.back()));
    CsvTable st({"variable", "alpha_re", "alpha_im", "beta_re", "beta_im"});
    for (int v = 0; v < g.size(); ++v)
      st.row() << v << g.alpha[v].real() << g.alpha[v].imag() << g.beta[v].real() << g.beta[v].imag();
    c.out.csv("final_state.csv", st);
    c.summary["final_gamma_re"] = g.gamma.real();
    c.summary["final_gamma_im"] = g.gamma.imag();
    c.summary["backend"] = backend;
  } else if (backend == "galerkin") {
    GalerkinStepper stepper(model, galerkin_options(c.kv, c.opt.jobs));
    const double T = c.kv.get_double("propagate.T", 1.0);
    const auto steps = get_ints(c.kv, "propagate.steps", {2, 4, 8, 16});
    const auto harmonics = get_ints(c.kv, "propagate.harmonics", {0, 1});
    const int P = stepper.options().P;
    const long fd = stepper.basis()->field.dim();
    StateVector f{stepper.basis(), VecXc::Zero(stepper.dim())};
    for (int j : harmonics) {
      if (j < -P || j > P) throw ConfigError("propagate.harmonics entries must lie in [-P, P]");
      f.c[(j + P) * fd] = 1.0;
    }
    if (f.c.norm() == 0) throw ConfigError("propagate.harmonics is empty");
    f.c /= f.c.norm();
    const OperatorMatrix H = assemble_hamiltonian(model, stepper.basis());
    EvolveOptions eo;
    eo.dense_limit = 0;
    const StateVector ref = reference_evolve(H, f, T, c.config.hbar, eo);
    const ConvergenceStudy s = convergence_study(stepper, f, T, steps, ref);
    add_convergence(c, "convergence.csv", s, T);
    const StateVector g = compose(stepper, f, Subdivision::uniform(T, steps.back()));
    c.out.csv("final_state.csv", [&](std::ostream& os) { write_state_csv(os, g); });
    c.out.csv("reference_state.csv", [&](std::ostream& os) { write_state_csv(os, ref); });
    c.summary["backend"] = backend;
    c.summary["dim"] = stepper.dim();
    c.summary["kernel_evaluations"] = stepper.evaluations();
  } else {
    throw ConfigError("propagate.backend must be analytic or galerkin");
  }
}

void study_residual(Context& c) {
  const Model model(c.config);
  require_analytic_valid(model);
  std::vector<double> rhos = c.kv.get_doubles("residual.rhos", {});
  if (rhos.empty())
    for (int e = 3; e <= 9; ++e) rhos.push_back(std::ldexp(1.0, -e));
  const GaussianState f = study_gaussian(model, c.kv, "residual");
  const ResidualStudy s = residual_study(model, f, rhos);
  CsvTable t({"rho", "residual", "residual_control", "norm"});
  for (const auto& r : s.rows) t.row() << r.rho << r.residual << r.residual_control << r.norm;
  c.out.csv("residual.csv", t);
  c.summary["slope"] = s.slope;
  c.summary["monotone"] = s.monotone;
}

void study_rho_star(Context& c) {
  RhoStarOptions o;
  o.samples = c.kv.get_int("rho_star.samples", o.samples);
  o.ceiling = c.kv.get_double("rho_star.ceiling", o.ceiling);
  o.floor = c.kv.get_double("rho_star.floor", o.floor);
  o.iterations = c.kv.get_int("rho_star.iterations", o.iterations);
  o.field_scale = c.kv.get_double("rho_star.field_scale", o.field_scale);
  o.sigma_nodes = c.kv.get_int("rho_star.sigma_nodes", o.sigma_nodes);
  o.seed = c.opt.seed;
  o.jobs = c.opt.jobs;
  const auto scales = c.kv.get_doubles("rho_star.charge_scales", {1.0});
  CsvTable t({"charge_scale", "rho_star", "at_ceiling", "min_det", "evaluations"});
  CsvTable certs({"charge_scale", "sample", "det"});
  json rows = json::array();
  for (double q : scales) {
    SimulationConfig cfg = c.config;
    for (double& e : cfg.charges) e *= q;
    const Model model(cfg);
    const RhoStarResult r = rho_star_search(model, o);
    t.row() << q << r.rho_star << (r.at_ceiling ? 1 : 0) << r.min_det << r.evaluations;
    for (const auto& ce : r.certificates) certs.row() << q << ce.sample << ce.det;
    rows.push_back({{"charge_scale", q}, {"rho_star", r.rho_star}, {"min_det", r.min_det}});
  }
  c.out.csv("rho_star.csv", t);
  c.out.csv("certificates.csv", certs);
  c.summary["results"] = rows;
  c.summary["note"] = "certified at the sampled points only";
}

void study_g_equivalence(Context& c) {
  const Model model(c.config);
  require_analytic_valid(model);
  const double rho = c.kv.get_double("g.rho", 0.25);
  const double e0 = c.config.epsilon_reg;
  const auto eps = c.kv.get_doubles("g.eps", {e0, e0 / 2, e0 / 4, e0 / 8});
  const GaussianState f = study_gaussian(model, c.kv, "g");
  const GEquivalence g = g_equivalence(model, f, rho, 0.0, eps);
  CsvTable t({"eps", "factor_re", "factor_im", "distance"});
  for (const auto& r : g.rows) t.row() << r.eps << r.factor_re << r.factor_im << r.distance;
  c.out.csv("g_equivalence.csv", t);
  c.summary["extrapolated_distance"] = g.extrapolated_distance;
  c.summary["lambda1_prime_modes"] = model.lambda1().N();

  CsvTable x({"s1", "s2", "s3", "k2", "oracle_re", "oracle_im", "quadrature_re", "quadrature_im",
              "rel_err"});
  for (const auto& w : model.lambda1().lambda_prime) {
    const double k2 = w.k.squaredNorm();
    const cplx o = xi_factor_oracle(k2, rho, c.config.hbar, model.volume());
    const cplx q = xi_factor_quadrature(k2, rho, c.config.hbar, model.volume()).extrapolated;
    x.row() << w.s[0] << w.s[1] << w.s[2] << k2 << o.real() << o.imag() << q.real() << q.imag()
            << std::abs(q - o) / std::abs(o);
  }
  c.out.csv("xi_factor.csv", x);
}

using Study = void (*)(Context&);

Study find_study(const std::string& name) {
  static const std::map<std::string, Study> table = {
      {"modes", study_modes},         {"coulomb-limit", study_coulomb},
      {"riemann", study_riemann},     {"fock-spectrum", study_fock},
      {"action-eval", study_action},  {"propagate", study_propagate},
      {"residual", study_residual},   {"rho-star", study_rho_star},
      {"g-equivalence", study_g_equivalence}};
  auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown subcommand '" + name + "'");
  return it->second;
}

}  // namespace

RunManifest run_subcommand(const std::string& name, const KeyValueFile& config,
                           const std::string& out_dir, const RunOptions& opt,
                           const std::string& config_path) {
  const Study study = find_study(name);
  if (opt.jobs < 1) throw ConfigError("--jobs must be >= 1");
  const SimulationConfig cfg = SimulationConfig::from_kv(config);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());

  RunManifest m;
  m.subcommand = name;
  m.config_path = config_path;
  m.config = config.entries();
  m.seed = opt.seed;
  m.jobs = opt.jobs;
  m.version = version_string();
  m.summary = json::object();

  Outputs out(out_dir);
  Context ctx{config, cfg, opt, out, m.summary};
  const auto t0 = std::chrono::steady_clock::now();
  study(ctx);
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.outputs = out.files();
  write_json_file((fs::path(out_dir) / "manifest.json").string(), m.to_json());
  return m;
}

RunManifest replay_manifest(const std::string& manifest_path, const std::string& out_dir) {
  std::ifstream is(manifest_path);
  if (!is) throw ConfigError("cannot open manifest " + manifest_path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + manifest_path + " is not valid JSON: " + e.what());
  }
  const RunManifest rec = RunManifest::from_json(j);
  KeyValueFile kv = KeyValueFile::parse("");
  for (const auto& [k, v] : rec.config) kv.set(k, v);
  RunOptions opt;
  opt.seed = rec.seed;
  opt.jobs = rec.jobs;
  return run_subcommand(rec.subcommand, kv, out_dir, opt, rec.config_path);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Time-sliced path-integral studies for nonrelativistic QED in a periodic box", "fmqed"};
  app.set_version_flag("--version", std::string("fmqed ") + version_string());
  app.require_subcommand(1);
  app.fallthrough();
  RunOptions opt;
  app.add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", opt.seed, "seed for sampled studies");

  std::string config_path, manifest_path;
  std::map<std::string, std::string> out_dirs;
  std::string chosen;
  for (const auto& name : subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " study");
    sub->add_option("config", config_path, "key = value configuration file")->required();
    sub->add_option("--out", out_dirs[name], "output directory")->default_val("out/" + name);
    sub->callback([&chosen, name]() { chosen = name; });
  }
  CLI::App* replay = app.add_subcommand("replay", "re-run the study recorded in a manifest");
  replay->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
  replay->add_option("--out", out_dirs["replay"], "output directory")->required();
  replay->callback([&chosen]() { chosen = "replay"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string& out_dir = out_dirs.at(chosen);
  try {
    RunManifest m;
    if (chosen == "replay") {
      m = replay_manifest(manifest_path, out_dir);
    } else {
      const KeyValueFile kv = KeyValueFile::load(config_path);
      m = run_subcommand(chosen, kv, out_dir, opt, config_path);
    }
    std::cout << m.subcommand << ": wrote";
    for (const auto& f : m.outputs) std::cout << ' ' << f;
    std::cout << " manifest.json to " << out_dir << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetExhausted& e) {
    std::cerr << "budget exhausted: " << e.what() << '\n';
    return kExitBudget;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace fmqed
