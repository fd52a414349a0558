#ifndef FMQED_CONFIG_HPP
#define FMQED_CONFIG_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fmqed/types.hpp"

namespace fmqed {

// Plain "key = value" text, '#' starts a comment. List values are
// whitespace separated; triples in a list of triples are separated by ';'.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text);
  static KeyValueFile load(const std::string& path);

  bool has(const std::string& key) const;
  const std::string& raw(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<Vec3i> get_triples(const std::string& key) const;
  std::vector<Vec3> get_points(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }

 private:
  std::map<std::string, std::string> entries_;
};

struct SimulationConfig {
  std::array<double, 3> L{2 * kPi, 2 * kPi, 2 * kPi};
  // cutoffs M_1 (Coulomb), M_2 (coupled field), M_3 (free field)
  std::array<int, 3> M{1, 1, 1};
  double hbar = 1.0;
  double c_light = 1.0;
  int n_particles = 0;
  std::vector<double> masses;
  std::vector<double> charges;
  double sigma_psi = 10.0;
  // <= 0 means "10 * max(L)"; +inf switches the spatial cutoff off
  double width_g = 0.0;
  int occupation_cap = 4;
  int particle_cutoff = 2;
  double epsilon_reg = 0.1;
  // optional restriction of every halved set to these s-triples
  std::vector<Vec3i> mode_select;

  double volume() const { return L[0] * L[1] * L[2]; }
  double g_width() const;
  bool coupled() const;
  void validate() const;

  static SimulationConfig from_kv(const KeyValueFile& kv);
};

}  // namespace fmqed

#endif
