#pragma once

// JSON records for fields: {m1, m2, hphase, p, zphase, c} or {..., c1, c2},
// coefficients as decimal strings ("-3/4", "0.125").

#include <string>

#include <json.hpp>

#include "pesat/field.hpp"

namespace pesat {

std::string coeff_to_string(const Rational& c);
std::string coeff_to_string(double c);
void coeff_from_string(const std::string& s, Rational& out);
void coeff_from_string(const std::string& s, double& out);

namespace detail {

inline nlohmann::json key_record(const TrigKey& k) {
  return {{"m1", k.m1}, {"m2", k.m2}, {"hphase", k.hphase == Phase::C ? "C" : "S"},
          {"p", k.p}, {"zphase", k.zphase == Phase::C ? "C" : "S"}};
}

inline TrigKey key_from_record(const nlohmann::json& r) {
  auto phase = [](const std::string& s) {
    if (s == "C") return Phase::C;
    if (s == "S") return Phase::S;
    throw Error(ErrorKind::ConfigError, "phase must be C or S, got " + s);
  };
  return TrigKey{r.at("m1").get<int>(), r.at("m2").get<int>(), phase(r.at("hphase").get<std::string>()),
                 r.at("p").get<int>(), phase(r.at("zphase").get<std::string>())};
}

}  // namespace detail

template <typename S>
nlohmann::json to_json(const ScalarField<S>& f) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [k, c] : f.terms) {
    nlohmann::json r = detail::key_record(k);
    r["c"] = coeff_to_string(c);
    out.push_back(std::move(r));
  }
  return out;
}

template <typename S>
nlohmann::json to_json(const VectorField<S>& f) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [k, c] : f.terms) {
    nlohmann::json r = detail::key_record(k);
    r["c1"] = coeff_to_string(c[0]);
    r["c2"] = coeff_to_string(c[1]);
    out.push_back(std::move(r));
  }
  return out;
}

template <typename S>
nlohmann::json to_json(const StateVector<S>& u) {
  return {{"v", to_json(u.v)}, {"theta", to_json(u.theta)}};
}

template <typename S>
ScalarField<S> scalar_field_from_json(const nlohmann::json& j) {
  ScalarField<S> out;
  for (const auto& r : j) {
    S c;
    coeff_from_string(r.at("c").get<std::string>(), c);
    out.add(detail::key_from_record(r), c);
  }
  return out;
}

template <typename S>
VectorField<S> vector_field_from_json(const nlohmann::json& j) {
  VectorField<S> out;
  for (const auto& r : j) {
    S c1, c2;
    coeff_from_string(r.at("c1").get<std::string>(), c1);
    coeff_from_string(r.at("c2").get<std::string>(), c2);
    out.add(detail::key_from_record(r), c1, c2);
  }
  return out;
}

template <typename S>
StateVector<S> state_from_json(const nlohmann::json& j) {
  return StateVector<S>{vector_field_from_json<S>(j.at("v")), scalar_field_from_json<S>(j.at("theta"))};
}

}  // namespace pesat
