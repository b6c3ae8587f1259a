#pragma once

// Forced directions and the fields built from them.

#include <vector>

#include "pesat/field.hpp"

namespace pesat {

/// Horizontal harmonics cos(m.x) and sin(m.x) times cos/sin(pz).
template <typename S = Rational>
ScalarField<S> cm(int m1, int m2, int p, Phase z, const S& c = S(1)) {
  return mode<S>(m1, m2, Phase::C, p, z, c);
}

template <typename S = Rational>
ScalarField<S> sm(int m1, int m2, int p, Phase z, const S& c = S(1)) {
  return mode<S>(m1, m2, Phase::S, p, z, c);
}

/// Temperature directions phi_1 .. phi_10 (one based).
template <typename S = Rational>
ScalarField<S> phi(int i) {
  switch (i) {
    case 1: return cm<S>(1, 0, 1, Phase::S);
    case 2: return sm<S>(1, 0, 1, Phase::S);
    case 3: return cm<S>(0, 1, 1, Phase::S);
    case 4: return sm<S>(0, 1, 1, Phase::S);
    case 5: return cm<S>(0, 0, 1, Phase::S);
    case 6: return cm<S>(2, 0, 1, Phase::S);
    case 7: return sm<S>(2, 0, 1, Phase::S);
    case 8: return cm<S>(0, 2, 1, Phase::S);
    case 9: return sm<S>(0, 2, 1, Phase::S);
    case 10: return cm<S>(0, 0, 2, Phase::S);
  }
  throw Error(ErrorKind::IndexOutOfRange, "temperature direction index must be in 1..10");
}

/// Velocity directions used together with the temperature ones (one based).
template <typename S = Rational>
VectorField<S> phi_tilde(int i) {
  const S o(1), z(0);
  switch (i) {
    case 1: return along(z, o, cm<S>(0, 0, 1, Phase::C));
    case 2: return along(z, o, cm<S>(0, 0, 2, Phase::C));
    case 3: return along(o, z, cm<S>(0, 0, 1, Phase::C));
    case 4: return along(o, z, cm<S>(0, 0, 2, Phase::C));
    case 5: return along(z, o, cm<S>(1, 0, 0, Phase::C));
    case 6: return along(z, o, sm<S>(1, 0, 0, Phase::C));
  }
  throw Error(ErrorKind::IndexOutOfRange, "velocity direction index must be in 1..6");
}

/// Velocity fields with vanishing self-advection (one based).
template <typename S = Rational>
VectorField<S> psi_field(int i) {
  const S o(1), z(0);
  switch (i) {
    case 1: return along(o, z, cm<S>(1, 0, 1, Phase::C));
    case 2: return along(o, z, sm<S>(1, 0, 1, Phase::C));
    case 3: return along(z, o, cm<S>(0, 1, 1, Phase::C));
    case 4: return along(z, o, sm<S>(0, 1, 1, Phase::C));
  }
  throw Error(ErrorKind::IndexOutOfRange, "index must be in 1..4");
}

template <typename S = Rational>
std::vector<StateVector<S>> seed_H10_directions() {
  std::vector<StateVector<S>> out;
  for (int i = 1; i <= 10; ++i) out.push_back(temperature_state(phi<S>(i)));
  return out;
}

template <typename S = Rational>
std::vector<StateVector<S>> seed_Htilde_directions() {
  std::vector<StateVector<S>> out;
  for (int i = 1; i <= 6; ++i) out.push_back(velocity_state(phi_tilde<S>(i)));
  for (int i = 1; i <= 10; ++i) out.push_back(temperature_state(phi<S>(i)));
  return out;
}

}  // namespace pesat
