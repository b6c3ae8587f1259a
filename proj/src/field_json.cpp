#include "pesat/field_json.hpp"

#include <charconv>
#include <cstdio>

namespace pesat {

std::string coeff_to_string(const Rational& c) { return c.get_str(); }

std::string coeff_to_string(double c) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), c);
  return std::string(buf, end);
}

void coeff_from_string(const std::string& s, Rational& out) {
  const auto dot = s.find('.');
  try {
    if (dot == std::string::npos && s.find_first_of("eE") == std::string::npos) {
      out = Rational(s);
      out.canonicalize();
      return;
    }
    if (s.find_first_of("eE/") != std::string::npos) throw std::invalid_argument(s);
    // finite decimal a.b -> ab / 10^len(b)
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    mpz_class den = 1;
    for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    out = Rational(mpz_class(digits), den);
    out.canonicalize();
  } catch (const std::invalid_argument&) {
    throw Error(ErrorKind::ConfigError, "not a rational coefficient: " + s);
  }
}

void coeff_from_string(const std::string& s, double& out) {
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rational q;
    coeff_from_string(s, q);
    out = q.get_d();
    return;
  }
  const char* first = s.data();
  auto [ptr, ec] = std::from_chars(first, first + s.size(), out);
  if (ec != std::errc() || ptr != first + s.size()) throw Error(ErrorKind::ConfigError, "not a number: " + s);
}

}  // namespace pesat
