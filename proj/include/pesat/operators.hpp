#pragma once

// Operators of the primitive-equation model acting on exact trigonometric
// states u = (v, theta).

#include "pesat/field.hpp"

namespace pesat {

template <typename S>
struct PhysicalParams {
  S nu1 = S(1);  // horizontal viscosity
  S mu1 = S(1);  // vertical viscosity
  S nu2 = S(1);  // horizontal diffusivity
  S mu2 = S(1);  // vertical diffusivity
  S f = S(1);    // Coriolis parameter
  StateVector<S> h;
};

namespace detail {

template <typename S>
void require_velocity(const VectorField<S>& v, const char* what) {
  if (!in_H1(v)) throw Error(ErrorKind::RoleViolation, std::string(what) + " is not a velocity field");
}

template <typename S>
void require_temperature(const ScalarField<S>& t, const char* what) {
  if (!is_theta_like(t)) throw Error(ErrorKind::RoleViolation, std::string(what) + " is not odd in z");
}

template <typename S>
void require_state(const StateVector<S>& u, const char* what) {
  require_velocity(u.v, what);
  require_temperature(u.theta, what);
}

// <a, grad> s + w dz s, with w the vertical velocity of a.
template <typename S>
ScalarField<S> transport(const VectorField<S>& a, const ScalarField<S>& w, const ScalarField<S>& s) {
  return product(component(a, 0), d_x(s)) + product(component(a, 1), d_y(s)) + product(w, d_z(s));
}

template <typename S>
VectorField<S> transport(const VectorField<S>& a, const ScalarField<S>& w, const VectorField<S>& s) {
  return from_components(transport(a, w, component(s, 0)), transport(a, w, component(s, 1)));
}

}  // namespace detail

/// w = -int_0^z div v.
template <typename S>
ScalarField<S> vertical_velocity(const VectorField<S>& v) {
  detail::require_velocity(v, "argument");
  return -antiderivative_z(divergence(v));
}

template <typename S>
StateVector<S> op_L(const StateVector<S>& u, const PhysicalParams<S>& prm) {
  StateVector<S> out;
  for (const auto& [k, c] : u.v.terms) {
    const S rate = prm.nu1 * k.wavenumber_sq() + prm.mu1 * (k.p * k.p);
    out.v.add(k, S(rate * c[0]), S(rate * c[1]));
  }
  for (const auto& [k, c] : u.theta.terms) {
    const S rate = prm.nu2 * k.wavenumber_sq() + prm.mu2 * (k.p * k.p);
    out.theta.add(k, S(rate * c));
  }
  return out;
}

/// Pi(f v_perp - int_0^z grad theta).
template <typename S>
VectorField<S> op_Q1(const StateVector<S>& u, const S& f) {
  detail::require_state(u, "state");
  VectorField<S> g = from_components(antiderivative_z(d_x(u.theta)), antiderivative_z(d_y(u.theta)));
  return leray_project(f * perp(u.v) - g);
}

template <typename S>
StateVector<S> op_Q(const StateVector<S>& u, const S& f) {
  return velocity_state(op_Q1(u, f));
}

/// Q1(0, theta); independent of the Coriolis parameter.
template <typename S>
VectorField<S> q1_theta(const ScalarField<S>& theta) {
  return op_Q1(temperature_state(theta), S(0));
}

template <typename S>
VectorField<S> op_B1(const VectorField<S>& v) {
  detail::require_velocity(v, "velocity");
  return leray_project(detail::transport(v, vertical_velocity(v), v));
}

template <typename S>
ScalarField<S> op_B2(const VectorField<S>& v, const ScalarField<S>& theta) {
  detail::require_velocity(v, "velocity");
  detail::require_temperature(theta, "temperature");
  return detail::transport(v, vertical_velocity(v), theta);
}

template <typename S>
StateVector<S> op_B(const StateVector<S>& u) {
  return StateVector<S>{op_B1(u.v), op_B2(u.v, u.theta)};
}

/// Symmetric bilinear form with b1(v, v) = 2 B1(v).
template <typename S>
VectorField<S> op_b1(const VectorField<S>& va, const VectorField<S>& vb) {
  detail::require_velocity(va, "first velocity");
  detail::require_velocity(vb, "second velocity");
  const ScalarField<S> wa = vertical_velocity(va);
  const ScalarField<S> wb = vertical_velocity(vb);
  return leray_project(detail::transport(va, wa, vb) + detail::transport(vb, wb, va));
}

template <typename S>
ScalarField<S> op_b2(const StateVector<S>& a, const StateVector<S>& b) {
  detail::require_state(a, "first state");
  detail::require_state(b, "second state");
  const ScalarField<S> wa = vertical_velocity(a.v);
  const ScalarField<S> wb = vertical_velocity(b.v);
  return detail::transport(a.v, wa, b.theta) + detail::transport(b.v, wb, a.theta);
}

/// Polarization of B: b(u, u) = 2 B(u).
template <typename S>
StateVector<S> op_b(const StateVector<S>& a, const StateVector<S>& b) {
  return StateVector<S>{op_b1(a.v, b.v), op_b2(a, b)};
}

/// B2(Q1(0, xi1), xi2) - B2(Q1(0, xi2), xi1).
template <typename S>
ScalarField<S> frak_b2(const ScalarField<S>& xi1, const ScalarField<S>& xi2) {
  return op_B2(q1_theta(xi1), xi2) - op_B2(q1_theta(xi2), xi1);
}

/// B2(pi1 u0 - Q1(xi)/2, pi2 xi) for a pure temperature state xi.
template <typename S>
ScalarField<S> psi(const StateVector<S>& u0, const StateVector<S>& xi) {
  if (!xi.v.empty()) throw Error(ErrorKind::PreconditionViolation, "xi must have no velocity part");
  return op_B2(u0.v - (S(1) / S(2)) * q1_theta(xi.theta), xi.theta);
}

/// u - L xi - (0, Psi(u, xi)) - Q xi for a pure temperature state xi.
template <typename S>
StateVector<S> f_map(const StateVector<S>& u, const ScalarField<S>& xi, const PhysicalParams<S>& prm) {
  const StateVector<S> hat = temperature_state(xi);
  StateVector<S> out = u - op_L(hat, prm) - op_Q(hat, prm.f);
  out.theta -= psi(u, hat);
  return out;
}

}  // namespace pesat
