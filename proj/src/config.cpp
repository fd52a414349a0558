#include "fmqed/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fmqed/errors.hpp"

namespace fmqed {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& tok) {
  try {
    size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + tok + "'");
  }
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (kv.entries_.count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv.entries_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool KeyValueFile::has(const std::string& key) const { return entries_.count(key) > 0; }

const std::string& KeyValueFile::raw(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return to_double(key, raw(key));
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  double v = to_double(key, raw(key));
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw ConfigError("key '" + key + "': expected an integer");
  return static_cast<int>(v);
}

std::string KeyValueFile::get_string(const std::string& key,
                                     const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

std::vector<double> KeyValueFile::get_doubles(const std::string& key,
                                              const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& t : split_ws(raw(key))) out.push_back(to_double(key, t));
  return out;
}

std::vector<Vec3i> KeyValueFile::get_triples(const std::string& key) const {
  std::vector<Vec3i> out;
  for (const auto& p : get_points(key)) {
    Vec3i s;
    for (int i = 0; i < 3; ++i) {
      if (p[i] != std::floor(p[i])) throw ConfigError("key '" + key + "': integer triples expected");
      s[i] = static_cast<int>(p[i]);
    }
    out.push_back(s);
  }
  return out;
}

std::vector<Vec3> KeyValueFile::get_points(const std::string& key) const {
  std::vector<Vec3> out;
  if (!has(key)) return out;
  std::string rest = raw(key);
  std::stringstream ss(rest);
  std::string chunk;
  while (std::getline(ss, chunk, ';')) {
    auto toks = split_ws(chunk);
    if (toks.empty()) continue;
    if (toks.size() != 3) throw ConfigError("key '" + key + "': each entry needs 3 numbers");
    out.emplace_back(to_double(key, toks[0]), to_double(key, toks[1]), to_double(key, toks[2]));
  }
  return out;
}

double SimulationConfig::g_width() const {
  if (width_g > 0) return width_g;
  return 10.0 * std::max({L[0], L[1], L[2]});
}

bool SimulationConfig::coupled() const {
  return std::any_of(charges.begin(), charges.end(), [](double e) { return e != 0.0; });
}

void SimulationConfig::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(L[i] > 0) || !std::isfinite(L[i]))
      throw ConfigError("box lengths L must be positive and finite");
    if (M[i] < 1) throw ConfigError("cutoffs M must be positive integers");
  }
  if (M[1] > M[2])
    throw ConfigError("cutoff constraint violated: M2 <= M3 is required so that the coupled "
                      "mode set is contained in the free-field mode set");
  if (!(hbar > 0) || !(c_light > 0)) throw ConfigError("hbar and c_light must be positive");
  if (n_particles < 0) throw ConfigError("n_particles must be non-negative");
  if (static_cast<int>(masses.size()) != n_particles ||
      static_cast<int>(charges.size()) != n_particles)
    throw ConfigError("masses and charges must each list n_particles values");
  for (double m : masses)
    if (!(m > 0)) throw ConfigError("masses must be positive");
  for (double e : charges)
    if (!std::isfinite(e)) throw ConfigError("charges must be finite");
  if (!(sigma_psi > 0)) throw ConfigError("sigma_psi must be positive");
  if (std::isnan(width_g) || width_g < 0) throw ConfigError("width_g must be positive (or omitted)");
  if (occupation_cap < 1) throw ConfigError("occupation_cap must be >= 1");
  if (particle_cutoff < 0) throw ConfigError("particle_cutoff must be >= 0");
  if (!(epsilon_reg > 0)) throw ConfigError("epsilon_reg must be positive");
  for (const auto& s : mode_select) {
    int first = s[0] != 0 ? s[0] : (s[1] != 0 ? s[1] : s[2]);
    if (first <= 0)
      throw ConfigError("mode_select entries must be nonzero with first nonzero component positive");
  }
}

SimulationConfig SimulationConfig::from_kv(const KeyValueFile& kv) {
  SimulationConfig c;
  auto L = kv.get_doubles("L", {c.L[0], c.L[1], c.L[2]});
  if (L.size() == 1) L = {L[0], L[0], L[0]};
  if (L.size() != 3) throw ConfigError("L needs 1 or 3 values");
  auto M = kv.get_doubles("M", {1, 1, 1});
  if (M.size() == 1) M = {M[0], M[0], M[0]};
  if (M.size() != 3) throw ConfigError("M needs 1 or 3 values");
  for (int i = 0; i < 3; ++i) {
    c.L[i] = L[i];
    if (M[i] != std::floor(M[i])) throw ConfigError("M must be integers");
    c.M[i] = static_cast<int>(M[i]);
  }
  c.hbar = kv.get_double("hbar", c.hbar);
  c.c_light = kv.get_double("c_light", c.c_light);
  c.n_particles = kv.get_int("n_particles", 0);
  c.masses = kv.get_doubles("masses", std::vector<double>(std::max(c.n_particles, 0), 1.0));
  c.charges = kv.get_doubles("charges", std::vector<double>(std::max(c.n_particles, 0), 0.0));
  c.sigma_psi = kv.get_double("sigma_psi", c.sigma_psi);
  c.width_g = kv.get_double("width_g", 0.0);
  if (kv.has("width_g") && !(c.width_g > 0))
    throw ConfigError("width_g must be positive (use inf to switch the cutoff off)");
  c.occupation_cap = kv.get_int("occupation_cap", c.occupation_cap);
  c.particle_cutoff = kv.get_int("particle_cutoff", c.particle_cutoff);
  c.epsilon_reg = kv.get_double("epsilon_reg", c.epsilon_reg);
  c.mode_select = kv.get_triples("mode_select");
  c.validate();
  return c;
}

}  // namespace fmqed
