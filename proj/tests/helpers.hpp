#pragma once

// Shared test utilities: a pointwise evaluator used as an independent oracle
// for the coefficient algebra, and random exact states.

#include <cmath>
#include <random>

#include "pesat/field.hpp"
#include "pesat/mode_space.hpp"

namespace testing {

using namespace pesat;

inline double basis_value(const TrigKey& k, double x, double y, double z) {
  const double arg = k.m1 * x + k.m2 * y;
  const double h = k.hphase == Phase::C ? std::cos(arg) : std::sin(arg);
  const double v = k.zphase == Phase::C ? std::cos(k.p * z) : std::sin(k.p * z);
  return h * v;
}

template <typename S>
double eval(const ScalarField<S>& f, double x, double y, double z) {
  double acc = 0;
  for (const auto& [k, c] : f.terms) acc += to_double(c) * basis_value(k, x, y, z);
  return acc;
}

template <typename S>
std::array<double, 2> eval(const VectorField<S>& f, double x, double y, double z) {
  std::array<double, 2> acc{0, 0};
  for (const auto& [k, c] : f.terms) {
    const double b = basis_value(k, x, y, z);
    acc[0] += to_double(c[0]) * b;
    acc[1] += to_double(c[1]) * b;
  }
  return acc;
}

inline std::mt19937_64 rng_for(std::uint64_t seed) {
  std::seed_seq seq{seed, std::uint64_t{0x7e57}};
  return std::mt19937_64(seq);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline TrigKey random_key(std::mt19937_64& rng, Truncation t, Phase z, int pmin) {
  TrigKey k;
  k.m1 = uniform_int(rng, -t.M, t.M);
  k.m2 = uniform_int(rng, -t.M, t.M);
  k.hphase = uniform_int(rng, 0, 1) ? Phase::S : Phase::C;
  k.p = uniform_int(rng, pmin, t.P);
  k.zphase = z;
  return k;
}

/// Random temperature field odd in z with small integer coefficients.
inline RScalarField random_theta(std::mt19937_64& rng, Truncation t, int terms) {
  RScalarField f;
  for (int i = 0; i < terms; ++i) f.add(random_key(rng, t, Phase::S, 1), Rational(uniform_int(rng, -3, 3)));
  return f;
}

/// Random velocity field in the state space.
inline RVectorField random_velocity(std::mt19937_64& rng, Truncation t, int terms) {
  RVectorField f;
  for (int i = 0; i < terms; ++i) {
    f.add(random_key(rng, t, Phase::C, 0), Rational(uniform_int(rng, -3, 3)), Rational(uniform_int(rng, -3, 3)));
  }
  return leray_project(f);
}

inline RState random_state(std::mt19937_64& rng, Truncation t, int terms) {
  return RState{random_velocity(rng, t, terms), random_theta(rng, t, terms)};
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace testing
