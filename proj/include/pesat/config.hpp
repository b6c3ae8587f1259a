#pragma once

// Run configuration: INI sections with a fixed key schema, PESAT_ environment
// overrides, typed accessors and a canonical form for hashing.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pesat/field.hpp"
#include "pesat/galerkin.hpp"
#include "pesat/haar_noise.hpp"

namespace pesat {

struct ConfigKey {
  const char* section;
  const char* key;
  const char* fallback;
};

/// Every accepted key with its default.
const std::vector<ConfigKey>& config_schema();

class RunConfig {
 public:
  /// Defaults only.
  RunConfig();

  /// Reads an INI file over the defaults. ConfigError names the offending key.
  static RunConfig from_file(const std::string& path);
  static RunConfig from_string(const std::string& text);
  /// Effective values, for example as stored in a manifest.
  static RunConfig from_map(const std::map<std::string, std::string>& flat);

  /// PESAT_<SECTION>_<KEY>=value; unknown keys in a known section are rejected.
  void apply_env(char** envp);
  void set(const std::string& section, const std::string& key, const std::string& value);

  const std::string& get(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
  /// Items separated by ';', trimmed, empty items dropped.
  std::vector<std::string> get_items(const std::string& section, const std::string& key) const;

  /// Checks every value parses and lies in range.
  void validate() const;

  /// section.key=value lines in sorted order.
  std::string canonical() const;
  std::uint64_t hash() const;
  std::map<std::string, std::string> flat() const;

  GalerkinConfig galerkin() const;
  NoiseConfig noise() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
};

std::uint64_t fnv1a(const std::string& s);

/// Sum of terms c*atom with atoms phiN, phitildeN, psiN, qphiN (the velocity
/// Q1(0, phi_N)), theta_<c|s>_<m1>_<m2>_<p> (temperature sin(pz) mode) and zero.
RState parse_state(const std::string& expr);

/// Temperature directions phi_1 .. phi_10 in model coordinates.
std::vector<Eigen::VectorXd> control_directions(const GalerkinModel& model);

}  // namespace pesat
