#include "pesat/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pesat/operators.hpp"
#include "pesat/seeds.hpp"

namespace pesat {

namespace {

enum class Kind { Real, Positive, Int, Bool, Text, Reals, State, States, Pairs };

struct Entry {
  ConfigKey key;
  Kind kind;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {{"physics", "nu1", "1"}, Kind::Positive},
      {{"physics", "mu1", "1"}, Kind::Positive},
      {{"physics", "nu2", "1"}, Kind::Positive},
      {{"physics", "mu2", "1"}, Kind::Positive},
      {{"physics", "f", "1"}, Kind::Real},
      {{"physics", "h", "zero"}, Kind::State},
      {{"truncation", "M", "2"}, Kind::Int},
      {{"truncation", "P", "2"}, Kind::Int},
      {{"time", "dt", "0.0009765625"}, Kind::Positive},
      {{"time", "scheme", "imex_rk2"}, Kind::Text},
      {{"time", "blowup", "1e6"}, Kind::Positive},
      {{"noise", "q", "2"}, Kind::Real},
      {{"noise", "Jmax", "8"}, Kind::Int},
      {{"noise", "density", "triangular"}, Kind::Text},
      {{"noise", "table", ""}, Kind::Reals},
      {{"noise", "amplitude", "1"}, Kind::Real},
      {{"noise", "seed", "0"}, Kind::Int},
      {{"experiment", "u0", "0.1*phi1"}, Kind::State},
      {{"experiment", "seeds", "H10"}, Kind::Text},
      {{"experiment", "max_j", "12"}, Kind::Int},
      {{"experiment", "mode", "provable"}, Kind::Text},
      {{"experiment", "linear", "false"}, Kind::Bool},
      {{"experiment", "duration", "1"}, Kind::Positive},
      {{"experiment", "deltas", "0.1, 0.01, 0.001"}, Kind::Reals},
      {{"experiment", "probe_xi", "phi1; phi2 + 0.5*phi6; phi10"}, Kind::States},
      {{"experiment", "probe_zeta", "zero | phi1; psi2 | zero; phitilde1 | phi3"}, Kind::Pairs},
      {{"experiment", "probe_steps", "400"}, Kind::Int},
      {{"experiment", "T", "1"}, Kind::Positive},
      {{"experiment", "eps", "0.1"}, Kind::Positive},
      {{"experiment", "targets", "0.1*theta_s_1_0_2; 0.1*theta_s_2_0_2; 0.1*theta_c_1_0_2; 0.1*qphi2"}, Kind::States},
      {{"experiment", "move_delta", "0.001"}, Kind::Positive},
      {{"experiment", "max_moves", "24"}, Kind::Int},
      {{"experiment", "corrections", "6"}, Kind::Int},
      {{"experiment", "tau", "0.5"}, Kind::Positive},
      {{"experiment", "ngrid", "129"}, Kind::Int},
      {{"experiment", "trials", "20"}, Kind::Int},
      {{"experiment", "route", "adjoint"}, Kind::Text},
      {{"experiment", "rel_tolerance", "1e-10"}, Kind::Positive},
      {{"experiment", "kick_dt", "0.015625"}, Kind::Positive},
      {{"experiment", "kick_Jmax", "6"}, Kind::Int},
      {{"experiment", "K", "30"}, Kind::Int},
      {{"experiment", "ensemble_size", "200"}, Kind::Int},
      {{"experiment", "delta_grid", "0.001, 0.01, 0.1"}, Kind::Reals},
      {{"experiment", "ball_radius", "1"}, Kind::Positive},
      {{"experiment", "nsamples", "200"}, Kind::Int},
      {{"experiment", "coupling_seeds", "5"}, Kind::Int},
      {{"experiment", "absorbing_kicks", "1000"}, Kind::Int},
      {{"experiment", "u0b", "0.2*phi1 + 0.1*phi10"}, Kind::State},
  };
  return table;
}

const Entry* find_entry(const std::string& section, const std::string& key) {
  for (const auto& e : entries()) {
    if (section == e.key.section && key == e.key.key) return &e;
  }
  return nullptr;
}

bool known_section(const std::string& s) {
  return s == "physics" || s == "truncation" || s == "time" || s == "noise" || s == "experiment";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::string name(const std::string& section, const std::string& key) { return section + "." + key; }

double parse_double(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError, where + ": '" + v + "' is not a number");
  }
}

long parse_long(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError, where + ": '" + v + "' is not an integer");
  }
}

// Exact value of a decimal or a fraction a/b.
Rational parse_rational(const std::string& s) {
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rational a = parse_rational(s.substr(0, slash)), b = parse_rational(s.substr(slash + 1));
    PESAT_DEMAND(sgn(b) != 0, ErrorKind::ConfigError, "zero denominator in '" + s + "'");
    return Rational(a / b);
  }
  std::string mant = s;
  long exp10 = 0;
  const auto e = s.find_first_of("eE");
  if (e != std::string::npos) {
    mant = s.substr(0, e);
    exp10 = parse_long(s.substr(e + 1), "coefficient");
  }
  const auto dot = mant.find('.');
  if (dot != std::string::npos) {
    exp10 -= static_cast<long>(mant.size() - dot - 1);
    mant.erase(dot, 1);
  }
  if (mant.empty() || mant.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorKind::ConfigError, "'" + s + "' is not a coefficient");
  }
  mpz_class num(mant), pow10 = 1;
  for (long i = 0; i < std::abs(exp10); ++i) pow10 *= 10;
  Rational r = exp10 >= 0 ? Rational(num * pow10) : Rational(num, pow10);
  r.canonicalize();
  return r;
}

int atom_index(const std::string& atom, const std::string& prefix) {
  const std::string digits = atom.substr(prefix.size());
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) return -1;
  return std::stoi(digits);
}

RState parse_indexed_atom(const std::string& atom) {
  if (atom == "zero") return {};
  if (atom.rfind("theta_", 0) == 0) {
    const auto parts = split(atom.substr(6), '_');
    PESAT_DEMAND(parts.size() == 4 && (parts[0] == "c" || parts[0] == "s"), ErrorKind::ConfigError,
                 "'" + atom + "' must read theta_<c|s>_<m1>_<m2>_<p>");
    const int m1 = static_cast<int>(parse_long(parts[1], atom));
    const int m2 = static_cast<int>(parse_long(parts[2], atom));
    const int p = static_cast<int>(parse_long(parts[3], atom));
    PESAT_DEMAND(p >= 1, ErrorKind::ConfigError, "'" + atom + "' needs p >= 1");
    return temperature_state(parts[0] == "c" ? cm<Rational>(m1, m2, p, Phase::S) : sm<Rational>(m1, m2, p, Phase::S));
  }
  // Longest prefixes first.
  if (atom.rfind("phitilde", 0) == 0) {
    const int i = atom_index(atom, "phitilde");
    if (i >= 0) return velocity_state(phi_tilde<Rational>(i));
  } else if (atom.rfind("qphi", 0) == 0) {
    const int i = atom_index(atom, "qphi");
    if (i >= 0) return velocity_state(q1_theta(phi<Rational>(i)));
  } else if (atom.rfind("phi", 0) == 0) {
    const int i = atom_index(atom, "phi");
    if (i >= 0) return temperature_state(phi<Rational>(i));
  } else if (atom.rfind("psi", 0) == 0) {
    const int i = atom_index(atom, "psi");
    if (i >= 0) return velocity_state(psi_field<Rational>(i));
  }
  throw Error(ErrorKind::ConfigError, "unknown state atom '" + atom + "'");
}

RState parse_atom(const std::string& atom) {
  try {
    return parse_indexed_atom(atom);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IndexOutOfRange) throw;
    throw Error(ErrorKind::ConfigError, "'" + atom + "': " + e.what());
  }
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back(e.key);
    return out;
  }();
  return keys;
}

RState parse_state(const std::string& expr) {
  std::vector<std::pair<int, std::string>> terms;  // sign, body
  std::string cur;
  int sign = 1;
  auto flush = [&] {
    const std::string t = trim(cur);
    PESAT_DEMAND(!t.empty(), ErrorKind::ConfigError, "empty term in '" + expr + "'");
    terms.emplace_back(sign, t);
    cur.clear();
  };
  for (std::size_t i = 0; i < expr.size(); ++i) {
    const char c = expr[i];
    const bool exponent_sign = i > 0 && (expr[i - 1] == 'e' || expr[i - 1] == 'E') && i > 1 &&
                               (std::isdigit(static_cast<unsigned char>(expr[i - 2])) || expr[i - 2] == '.');
    if ((c == '+' || c == '-') && !exponent_sign) {
      const int sg = c == '-' ? -1 : 1;
      if (trim(cur).empty()) {
        sign *= sg;
      } else {
        flush();
        sign = sg;
      }
      continue;
    }
    cur += c;
  }
  flush();
  RState out;
  for (const auto& [sg, body] : terms) {
    const auto star = body.find('*');
    Rational coef(sg);
    std::string atom = body;
    if (star != std::string::npos) {
      coef *= parse_rational(trim(body.substr(0, star)));
      atom = trim(body.substr(star + 1));
    }
    out += coef * parse_atom(atom);
  }
  return out;
}

std::vector<Eigen::VectorXd> control_directions(const GalerkinModel& model) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 1; i <= 10; ++i) out.push_back(model.coords(cast<double>(temperature_state(phi<Rational>(i)))));
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

RunConfig::RunConfig() {
  for (const auto& e : entries()) values_[e.key.section][e.key.key] = e.key.fallback;
}

RunConfig RunConfig::from_string(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed config: ") + e.message() + " at line " +
                                            std::to_string(e.line()));
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw Error(ErrorKind::ConfigError, "key '" + section + "' lies outside a section");
    PESAT_DEMAND(known_section(section), ErrorKind::ConfigError, "unknown section [" + section + "]");
    for (const auto& [key, value] : body) cfg.set(section, key, value.get_value<std::string>());
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  PESAT_DEMAND(in.good(), ErrorKind::ConfigError, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& flat) {
  RunConfig cfg;
  for (const auto& [k, v] : flat) {
    const auto dot = k.find('.');
    PESAT_DEMAND(dot != std::string::npos, ErrorKind::ConfigError, "key '" + k + "' lacks a section");
    cfg.set(k.substr(0, dot), k.substr(dot + 1), v);
  }
  return cfg;
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  PESAT_DEMAND(find_entry(section, key) != nullptr, ErrorKind::ConfigError, "unknown key " + name(section, key));
  values_[section][key] = trim(value);
}

void RunConfig::apply_env(char** envp) {
  if (envp == nullptr) return;
  for (char** p = envp; *p != nullptr; ++p) {
    const std::string kv = *p;
    if (kv.rfind("PESAT_", 0) != 0) continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    std::string rest = kv.substr(6, eq - 6);
    const auto us = rest.find('_');
    if (us == std::string::npos) continue;
    std::string section = rest.substr(0, us), key = rest.substr(us + 1);
    std::transform(section.begin(), section.end(), section.begin(), [](unsigned char c) { return std::tolower(c); });
    if (!known_section(section)) continue;
    // Keys are matched without regard to case.
    const Entry* hit = nullptr;
    for (const auto& e : entries()) {
      std::string k = e.key.key;
      if (section != e.key.section || k.size() != key.size()) continue;
      if (std::equal(k.begin(), k.end(), key.begin(),
                     [](char a, char b) { return std::tolower(a) == std::tolower(b); })) {
        hit = &e;
      }
    }
    PESAT_DEMAND(hit != nullptr, ErrorKind::ConfigError, "unknown key " + name(section, key) + " in " + kv.substr(0, eq));
    set(section, hit->key.key, kv.substr(eq + 1));
  }
}

const std::string& RunConfig::get(const std::string& section, const std::string& key) const {
  const auto s = values_.find(section);
  PESAT_DEMAND(s != values_.end(), ErrorKind::ConfigError, "unknown section " + section);
  const auto k = s->second.find(key);
  PESAT_DEMAND(k != s->second.end(), ErrorKind::ConfigError, "unknown key " + name(section, key));
  return k->second;
}

double RunConfig::get_double(const std::string& section, const std::string& key) const {
  return parse_double(get(section, key), name(section, key));
}

int RunConfig::get_int(const std::string& section, const std::string& key) const {
  const long v = parse_long(get(section, key), name(section, key));
  PESAT_DEMAND(v >= -2147483647L && v <= 2147483647L, ErrorKind::ConfigError, name(section, key) + " is out of range");
  return static_cast<int>(v);
}

bool RunConfig::get_bool(const std::string& section, const std::string& key) const {
  const std::string& v = get(section, key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::ConfigError, name(section, key) + ": '" + v + "' is not a boolean");
}

std::vector<double> RunConfig::get_doubles(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(get(section, key), ',')) out.push_back(parse_double(item, name(section, key)));
  return out;
}

std::vector<std::string> RunConfig::get_items(const std::string& section, const std::string& key) const {
  return split(get(section, key), ';');
}

void RunConfig::validate() const {
  for (const auto& e : entries()) {
    const std::string s = e.key.section, k = e.key.key, where = name(s, k);
    try {
      switch (e.kind) {
        case Kind::Real: get_double(s, k); break;
        case Kind::Positive:
          PESAT_DEMAND(get_double(s, k) > 0, ErrorKind::ConfigError, "must be positive");
          break;
        case Kind::Int: get_int(s, k); break;
        case Kind::Bool: get_bool(s, k); break;
        case Kind::Text: break;
        case Kind::Reals: get_doubles(s, k); break;
        case Kind::State: parse_state(get(s, k)); break;
        case Kind::States:
          for (const auto& item : get_items(s, k)) parse_state(item);
          break;
        case Kind::Pairs:
          for (const auto& item : get_items(s, k)) {
            const auto parts = split(item, '|');
            PESAT_DEMAND(parts.size() == 2, ErrorKind::ConfigError, "'" + item + "' must read zeta | eta");
            PESAT_DEMAND(parse_state(parts[0]).theta.empty(), ErrorKind::ConfigError,
                         "zeta '" + parts[0] + "' must have no temperature part");
            parse_state(parts[1]);
          }
          break;
      }
    } catch (const Error& err) {
      const std::string msg = err.what();
      if (msg.find(where) != std::string::npos) throw;
      throw Error(ErrorKind::ConfigError, where + ": " + msg);
    }
  }
  auto demand = [](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw Error(ErrorKind::ConfigError, key + ": " + what);
  };
  demand(get_int("truncation", "M") >= 1, "truncation.M", "must be at least 1");
  demand(get_int("truncation", "P") >= 1, "truncation.P", "must be at least 1");
  const std::string scheme = get("time", "scheme");
  demand(scheme == "imex_rk2" || scheme == "semi_implicit_euler", "time.scheme",
         "must be imex_rk2 or semi_implicit_euler");
  const std::string density = get("noise", "density");
  demand(density == "triangular" || density == "table", "noise.density", "must be triangular or table");
  demand(get_int("noise", "seed") >= 0, "noise.seed", "must be nonnegative");
  try {
    noise().validate();
  } catch (const Error& err) {
    throw Error(ErrorKind::ConfigError, std::string("noise: ") + err.what());
  }
  const std::string seeds = get("experiment", "seeds");
  demand(seeds == "H10" || seeds == "Htilde" || seeds == "phi5", "experiment.seeds", "must be H10, Htilde or phi5");
  const std::string mode = get("experiment", "mode");
  demand(mode == "provable" || mode == "span", "experiment.mode", "must be provable or span");
  const std::string route = get("experiment", "route");
  demand(route == "adjoint" || route == "forward", "experiment.route", "must be adjoint or forward");
  demand(get_int("experiment", "max_j") >= 0, "experiment.max_j", "must be nonnegative");
  demand(get_int("experiment", "ngrid") >= 4, "experiment.ngrid", "must be at least 4");
  demand(get_int("experiment", "trials") >= 1, "experiment.trials", "must be at least 1");
  demand(get_int("experiment", "K") >= 1, "experiment.K", "must be at least 1");
  demand(get_int("experiment", "ensemble_size") >= 2, "experiment.ensemble_size", "must be at least 2");
  demand(get_int("experiment", "nsamples") >= 1, "experiment.nsamples", "must be at least 1");
  demand(get_int("experiment", "coupling_seeds") >= 1, "experiment.coupling_seeds", "must be at least 1");
  demand(get_int("experiment", "absorbing_kicks") >= 80, "experiment.absorbing_kicks", "must be at least 80");
  demand(get_int("experiment", "probe_steps") >= 1, "experiment.probe_steps", "must be at least 1");
  demand(get_int("experiment", "max_moves") >= 1, "experiment.max_moves", "must be at least 1");
  demand(get_int("experiment", "corrections") >= 0, "experiment.corrections", "must be nonnegative");
  demand(get_int("experiment", "kick_Jmax") >= 0 && get_int("experiment", "kick_Jmax") <= 20,
         "experiment.kick_Jmax", "must be in 0..20");
  for (double d : get_doubles("experiment", "deltas")) demand(d > 0, "experiment.deltas", "must be positive");
  for (double d : get_doubles("experiment", "delta_grid")) demand(d > 0, "experiment.delta_grid", "must be positive");
  demand(get_doubles("experiment", "deltas").size() >= 2, "experiment.deltas", "needs at least two values");
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : flat()) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

std::map<std::string, std::string> RunConfig::flat() const {
  std::map<std::string, std::string> out;
  for (const auto& [s, body] : values_) {
    for (const auto& [k, v] : body) out[name(s, k)] = v;
  }
  return out;
}

GalerkinConfig RunConfig::galerkin() const {
  GalerkinConfig g;
  g.trunc = {get_int("truncation", "M"), get_int("truncation", "P")};
  g.params.nu1 = get_double("physics", "nu1");
  g.params.mu1 = get_double("physics", "mu1");
  g.params.nu2 = get_double("physics", "nu2");
  g.params.mu2 = get_double("physics", "mu2");
  g.params.f = get_double("physics", "f");
  g.params.h = cast<double>(parse_state(get("physics", "h")));
  g.dt = get_double("time", "dt");
  g.scheme = scheme_from_string(get("time", "scheme"));
  g.blowup = get_double("time", "blowup");
  return g;
}

NoiseConfig RunConfig::noise() const {
  NoiseConfig n;
  n.q = get_double("noise", "q");
  n.Jmax = get_int("noise", "Jmax");
  n.density = get("noise", "density") == "table" ? Density::Table : Density::Triangular;
  n.table = get_doubles("noise", "table");
  n.amplitude = get_double("noise", "amplitude");
  n.seed = static_cast<std::uint64_t>(get_int("noise", "seed"));
  return n;
}

}  // namespace pesat
