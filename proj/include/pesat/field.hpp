#pragma once

// Trigonometric polynomials on the periodic box (R/2piZ)^3.
//
// A basis element is h(m.x) * z(p z) with h, z in {cos, sin}, x = (x, y) the
// horizontal coordinates and m = (m1, m2) an integer wavevector. Coefficients
// are either exact rationals (mpq_class) or doubles; all algorithms here are
// templated on the coefficient type.

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <type_traits>

#include <gmpxx.h>

#include "pesat/error.hpp"

namespace pesat {

using Rational = mpq_class;

inline Rational frac(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline double to_double(double x) { return x; }
inline double to_double(const Rational& q) { return q.get_d(); }

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const Rational& q) { return sgn(q) == 0; }

inline constexpr double kTorusVolume =
    8.0 * std::numbers::pi * std::numbers::pi * std::numbers::pi;

enum class Phase : std::uint8_t { C = 0, S = 1 };

struct TrigKey {
  int m1 = 0;
  int m2 = 0;
  Phase hphase = Phase::C;
  int p = 0;
  Phase zphase = Phase::C;

  auto operator<=>(const TrigKey&) const = default;

  int wavenumber_sq() const { return m1 * m1 + m2 * m2; }
  bool horizontal_trivial() const { return m1 == 0 && m2 == 0; }

  bool is_canonical() const {
    if (m1 < 0 || (m1 == 0 && m2 < 0)) return false;
    if (horizontal_trivial() && hphase == Phase::S) return false;
    if (p < 0 || (p == 0 && zphase == Phase::S)) return false;
    return true;
  }
};

/// Folds a raw key onto its canonical representative using the parity of cos
/// and sin. Returns the sign picked up, or 0 when the basis element is
/// identically zero.
inline int canonicalize(TrigKey& k) {
  int sign = 1;
  if (k.m1 < 0 || (k.m1 == 0 && k.m2 < 0)) {
    k.m1 = -k.m1;
    k.m2 = -k.m2;
    if (k.hphase == Phase::S) sign = -sign;
  }
  if (k.horizontal_trivial() && k.hphase == Phase::S) return 0;
  if (k.p < 0) {
    k.p = -k.p;
    if (k.zphase == Phase::S) sign = -sign;
  }
  if (k.p == 0 && k.zphase == Phase::S) return 0;
  return sign;
}

/// L2 mass of a canonical basis element divided by the box volume.
template <typename S>
S unit_mass(const TrigKey& k) {
  int halvings = (k.horizontal_trivial() ? 0 : 1) + (k.p == 0 ? 0 : 1);
  return S(1) / S(1 << halvings);
}

template <typename S>
struct ScalarField {
  using Scalar = S;
  std::map<TrigKey, S> terms;

  /// Adds c times the (possibly non-canonical) basis element k.
  void add(TrigKey k, const S& c) {
    int sign = canonicalize(k);
    if (sign == 0 || is_zero(c)) return;
    auto [it, inserted] = terms.try_emplace(k, S(0));
    if (sign > 0) {
      it->second += c;
    } else {
      it->second -= c;
    }
    if (is_zero(it->second)) terms.erase(it);
  }

  S coeff(const TrigKey& k) const {
    auto it = terms.find(k);
    return it == terms.end() ? S(0) : it->second;
  }

  bool empty() const { return terms.empty(); }
  std::size_t size() const { return terms.size(); }
  bool operator==(const ScalarField&) const = default;
};

template <typename S>
struct VectorField {
  using Scalar = S;
  using Pair = std::array<S, 2>;
  std::map<TrigKey, Pair> terms;

  void add(TrigKey k, const S& c1, const S& c2) {
    int sign = canonicalize(k);
    if (sign == 0 || (is_zero(c1) && is_zero(c2))) return;
    auto [it, inserted] = terms.try_emplace(k, Pair{S(0), S(0)});
    if (sign > 0) {
      it->second[0] += c1;
      it->second[1] += c2;
    } else {
      it->second[0] -= c1;
      it->second[1] -= c2;
    }
    if (is_zero(it->second[0]) && is_zero(it->second[1])) terms.erase(it);
  }

  Pair coeff(const TrigKey& k) const {
    auto it = terms.find(k);
    return it == terms.end() ? Pair{S(0), S(0)} : it->second;
  }

  bool empty() const { return terms.empty(); }
  std::size_t size() const { return terms.size(); }
  bool operator==(const VectorField&) const = default;
};

/// Velocity and temperature parts of a state.
template <typename S>
struct StateVector {
  using Scalar = S;
  VectorField<S> v;
  ScalarField<S> theta;

  bool empty() const { return v.empty() && theta.empty(); }
  bool operator==(const StateVector&) const = default;
};

using RScalarField = ScalarField<Rational>;
using RVectorField = VectorField<Rational>;
using RState = StateVector<Rational>;
using DScalarField = ScalarField<double>;
using DVectorField = VectorField<double>;
using DState = StateVector<double>;

// ---------------------------------------------------------------------------
// Construction helpers.

template <typename S>
ScalarField<S> mode(int m1, int m2, Phase h, int p, Phase z, const S& c = S(1)) {
  ScalarField<S> f;
  f.add({m1, m2, h, p, z}, c);
  return f;
}

template <typename S>
VectorField<S> vmode(const S& c1, const S& c2, int m1, int m2, Phase h, int p, Phase z) {
  VectorField<S> f;
  f.add({m1, m2, h, p, z}, c1, c2);
  return f;
}

/// The vector field a * s for a constant direction a and a scalar field s.
template <typename S>
VectorField<S> along(const S& a1, const S& a2, const ScalarField<S>& s) {
  VectorField<S> out;
  for (const auto& [k, c] : s.terms) out.add(k, a1 * c, a2 * c);
  return out;
}

template <typename S>
StateVector<S> velocity_state(VectorField<S> v) {
  return StateVector<S>{std::move(v), {}};
}

template <typename S>
StateVector<S> temperature_state(ScalarField<S> theta) {
  return StateVector<S>{{}, std::move(theta)};
}

template <typename S>
ScalarField<S> component(const VectorField<S>& f, int i) {
  ScalarField<S> out;
  for (const auto& [k, c] : f.terms) {
    if (!is_zero(c[i])) out.terms.emplace(k, c[i]);
  }
  return out;
}

template <typename S>
VectorField<S> from_components(const ScalarField<S>& a, const ScalarField<S>& b) {
  VectorField<S> out;
  for (const auto& [k, c] : a.terms) out.add(k, c, S(0));
  for (const auto& [k, c] : b.terms) out.add(k, S(0), c);
  return out;
}

template <typename T, typename S>
ScalarField<T> cast(const ScalarField<S>& f) {
  ScalarField<T> out;
  for (const auto& [k, c] : f.terms) out.add(k, T(to_double(c)));
  return out;
}

template <typename T, typename S>
VectorField<T> cast(const VectorField<S>& f) {
  VectorField<T> out;
  for (const auto& [k, c] : f.terms) out.add(k, T(to_double(c[0])), T(to_double(c[1])));
  return out;
}

template <typename T, typename S>
StateVector<T> cast(const StateVector<S>& u) {
  return StateVector<T>{cast<T>(u.v), cast<T>(u.theta)};
}

// ---------------------------------------------------------------------------
// Linear structure.

template <typename S>
ScalarField<S>& operator+=(ScalarField<S>& a, const ScalarField<S>& b) {
  for (const auto& [k, c] : b.terms) a.add(k, c);
  return a;
}

template <typename S>
ScalarField<S>& operator-=(ScalarField<S>& a, const ScalarField<S>& b) {
  for (const auto& [k, c] : b.terms) a.add(k, -c);
  return a;
}

template <typename S>
ScalarField<S> operator+(ScalarField<S> a, const ScalarField<S>& b) { return a += b; }

template <typename S>
ScalarField<S> operator-(ScalarField<S> a, const ScalarField<S>& b) { return a -= b; }

template <typename S>
ScalarField<S> operator*(const std::type_identity_t<S>& s, const ScalarField<S>& a) {
  ScalarField<S> out;
  if (is_zero(s)) return out;
  for (const auto& [k, c] : a.terms) out.terms.emplace(k, s * c);
  return out;
}

template <typename S>
ScalarField<S> operator-(const ScalarField<S>& a) { return S(-1) * a; }

template <typename S>
VectorField<S>& operator+=(VectorField<S>& a, const VectorField<S>& b) {
  for (const auto& [k, c] : b.terms) a.add(k, c[0], c[1]);
  return a;
}

template <typename S>
VectorField<S>& operator-=(VectorField<S>& a, const VectorField<S>& b) {
  for (const auto& [k, c] : b.terms) a.add(k, -c[0], -c[1]);
  return a;
}

template <typename S>
VectorField<S> operator+(VectorField<S> a, const VectorField<S>& b) { return a += b; }

template <typename S>
VectorField<S> operator-(VectorField<S> a, const VectorField<S>& b) { return a -= b; }

template <typename S>
VectorField<S> operator*(const std::type_identity_t<S>& s, const VectorField<S>& a) {
  VectorField<S> out;
  if (is_zero(s)) return out;
  for (const auto& [k, c] : a.terms) out.terms.emplace(k, typename VectorField<S>::Pair{s * c[0], s * c[1]});
  return out;
}

template <typename S>
VectorField<S> operator-(const VectorField<S>& a) { return S(-1) * a; }

template <typename S>
StateVector<S>& operator+=(StateVector<S>& a, const StateVector<S>& b) {
  a.v += b.v;
  a.theta += b.theta;
  return a;
}

template <typename S>
StateVector<S>& operator-=(StateVector<S>& a, const StateVector<S>& b) {
  a.v -= b.v;
  a.theta -= b.theta;
  return a;
}

template <typename S>
StateVector<S> operator+(StateVector<S> a, const StateVector<S>& b) { return a += b; }

template <typename S>
StateVector<S> operator-(StateVector<S> a, const StateVector<S>& b) { return a -= b; }

template <typename S>
StateVector<S> operator*(const std::type_identity_t<S>& s, const StateVector<S>& a) {
  return StateVector<S>{s * a.v, s * a.theta};
}

template <typename S>
StateVector<S> operator-(const StateVector<S>& a) { return S(-1) * a; }

// ---------------------------------------------------------------------------
// Products and derivatives.

namespace detail {

// f(a) g(b) = s_diff/2 * h_diff(a - b) + s_sum/2 * h_sum(a + b).
struct PhaseSplit {
  int s_diff;
  Phase h_diff;
  int s_sum;
  Phase h_sum;
};

inline PhaseSplit split(Phase a, Phase b) {
  if (a == Phase::C && b == Phase::C) return {1, Phase::C, 1, Phase::C};
  if (a == Phase::S && b == Phase::S) return {1, Phase::C, -1, Phase::C};
  if (a == Phase::S && b == Phase::C) return {1, Phase::S, 1, Phase::S};
  return {-1, Phase::S, 1, Phase::S};
}

template <typename S>
void accumulate_product(ScalarField<S>& out, const TrigKey& a, const TrigKey& b, const S& c) {
  const PhaseSplit h = split(a.hphase, b.hphase);
  const PhaseSplit z = split(a.zphase, b.zphase);
  const S quarter = c / S(4);
  for (int hs = 0; hs < 2; ++hs) {
    const int sh = hs ? h.s_sum : h.s_diff;
    const Phase ph = hs ? h.h_sum : h.h_diff;
    const int m1 = hs ? a.m1 + b.m1 : a.m1 - b.m1;
    const int m2 = hs ? a.m2 + b.m2 : a.m2 - b.m2;
    for (int zs = 0; zs < 2; ++zs) {
      const int sz = zs ? z.s_sum : z.s_diff;
      const Phase pz = zs ? z.h_sum : z.h_diff;
      const int p = zs ? a.p + b.p : a.p - b.p;
      out.add({m1, m2, ph, p, pz}, sh * sz > 0 ? quarter : S(-quarter));
    }
  }
}

}  // namespace detail

template <typename S>
ScalarField<S> product(const ScalarField<S>& a, const ScalarField<S>& b) {
  ScalarField<S> out;
  for (const auto& [ka, ca] : a.terms) {
    for (const auto& [kb, cb] : b.terms) detail::accumulate_product(out, ka, kb, S(ca * cb));
  }
  return out;
}

template <typename S>
ScalarField<S> d_x(const ScalarField<S>& f) {
  ScalarField<S> out;
  for (const auto& [k, c] : f.terms) {
    if (k.m1 == 0) continue;
    TrigKey t = k;
    if (k.hphase == Phase::C) {
      t.hphase = Phase::S;
      out.add(t, S(-k.m1 * c));
    } else {
      t.hphase = Phase::C;
      out.add(t, S(k.m1 * c));
    }
  }
  return out;
}

template <typename S>
ScalarField<S> d_y(const ScalarField<S>& f) {
  ScalarField<S> out;
  for (const auto& [k, c] : f.terms) {
    if (k.m2 == 0) continue;
    TrigKey t = k;
    if (k.hphase == Phase::C) {
      t.hphase = Phase::S;
      out.add(t, S(-k.m2 * c));
    } else {
      t.hphase = Phase::C;
      out.add(t, S(k.m2 * c));
    }
  }
  return out;
}

template <typename S>
ScalarField<S> d_z(const ScalarField<S>& f) {
  ScalarField<S> out;
  for (const auto& [k, c] : f.terms) {
    if (k.p == 0) continue;
    TrigKey t = k;
    if (k.zphase == Phase::C) {
      t.zphase = Phase::S;
      out.add(t, S(-k.p * c));
    } else {
      t.zphase = Phase::C;
      out.add(t, S(k.p * c));
    }
  }
  return out;
}

/// The primitive vanishing at z = 0. Requires every z-independent term to be
/// absent, otherwise the primitive is not periodic.
template <typename S>
ScalarField<S> antiderivative_z(const ScalarField<S>& f) {
  ScalarField<S> out;
  for (const auto& [k, c] : f.terms) {
    if (k.p == 0) {
      throw Error(ErrorKind::NonPeriodicAntiderivative, "z-independent term in integrand");
    }
    const S scaled = c / S(k.p);
    TrigKey t = k;
    if (k.zphase == Phase::C) {
      t.zphase = Phase::S;
      out.add(t, scaled);
    } else {
      // sin(pz) -> (1 - cos(pz)) / p
      t.zphase = Phase::C;
      out.add(t, S(-scaled));
      t.p = 0;
      out.add(t, scaled);
    }
  }
  return out;
}

template <typename S>
VectorField<S> d_x(const VectorField<S>& f) { return from_components(d_x(component(f, 0)), d_x(component(f, 1))); }
template <typename S>
VectorField<S> d_y(const VectorField<S>& f) { return from_components(d_y(component(f, 0)), d_y(component(f, 1))); }
template <typename S>
VectorField<S> d_z(const VectorField<S>& f) { return from_components(d_z(component(f, 0)), d_z(component(f, 1))); }

template <typename S>
VectorField<S> product(const ScalarField<S>& s, const VectorField<S>& f) {
  return from_components(product(s, component(f, 0)), product(s, component(f, 1)));
}

template <typename S>
ScalarField<S> divergence(const VectorField<S>& f) {
  return d_x(component(f, 0)) + d_y(component(f, 1));
}

/// (v1, v2) -> (-v2, v1).
template <typename S>
VectorField<S> perp(const VectorField<S>& f) {
  VectorField<S> out;
  for (const auto& [k, c] : f.terms) out.terms.emplace(k, typename VectorField<S>::Pair{S(-c[1]), c[0]});
  return out;
}

// ---------------------------------------------------------------------------
// Roles and projection.

template <typename S>
bool is_theta_like(const ScalarField<S>& f) {
  for (const auto& [k, c] : f.terms) {
    if (k.zphase != Phase::S) return false;
  }
  return true;
}

template <typename S>
bool is_v_like(const VectorField<S>& f) {
  for (const auto& [k, c] : f.terms) {
    if (k.zphase != Phase::C) return false;
    if (k.p == 0 && k.horizontal_trivial()) return false;
  }
  return true;
}

/// Even in z, zero mean and vertically averaged part divergence free.
template <typename S>
bool in_H1(const VectorField<S>& f) {
  if (!is_v_like(f)) return false;
  for (const auto& [k, c] : f.terms) {
    if (k.p == 0 && !is_zero(S(k.m1 * c[0] + k.m2 * c[1]))) return false;
  }
  return true;
}

template <typename S>
bool in_state_space(const StateVector<S>& u) {
  return in_H1(u.v) && is_theta_like(u.theta);
}

/// Orthogonal projection of an even-in-z field onto the velocity space:
/// drops the mean and the gradient part of the z-independent component.
template <typename S>
VectorField<S> leray_project(const VectorField<S>& f) {
  VectorField<S> out;
  for (const auto& [k, c] : f.terms) {
    if (k.zphase != Phase::C) throw Error(ErrorKind::ParityViolation, "field is not even in z");
    if (k.p > 0) {
      out.terms.emplace(k, c);
      continue;
    }
    if (k.horizontal_trivial()) continue;
    // keep the component along m_perp = (-m2, m1)
    const S along = S(-k.m2 * c[0] + k.m1 * c[1]) / S(k.wavenumber_sq());
    out.add(k, S(-k.m2 * along), S(k.m1 * along));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inner products. The *_unit variants are exact and measured in units of the
// box volume.

template <typename S>
S inner_unit(const ScalarField<S>& a, const ScalarField<S>& b) {
  S acc(0);
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const auto& [k, c] : small.terms) {
    auto it = large.terms.find(k);
    if (it != large.terms.end()) acc += c * it->second * unit_mass<S>(k);
  }
  return acc;
}

template <typename S>
S inner_unit(const VectorField<S>& a, const VectorField<S>& b) {
  S acc(0);
  for (const auto& [k, c] : a.terms) {
    auto it = b.terms.find(k);
    if (it != b.terms.end()) acc += (c[0] * it->second[0] + c[1] * it->second[1]) * unit_mass<S>(k);
  }
  return acc;
}

template <typename S>
S inner_unit(const StateVector<S>& a, const StateVector<S>& b) {
  return inner_unit(a.v, b.v) + inner_unit(a.theta, b.theta);
}

template <typename Field>
double inner(const Field& a, const Field& b) {
  return kTorusVolume * to_double(inner_unit(a, b));
}

/// Squared H^k norm in units of the box volume, weights (1 + |m|^2 + p^2)^k.
template <typename S>
S sobolev_norm_sq_unit(const StateVector<S>& u, int k) {
  S acc(0);
  auto weight = [k](const TrigKey& key) {
    S w(1);
    const S base(1 + key.wavenumber_sq() + key.p * key.p);
    for (int i = 0; i < k; ++i) w *= base;
    return w;
  };
  for (const auto& [key, c] : u.v.terms) acc += weight(key) * (c[0] * c[0] + c[1] * c[1]) * unit_mass<S>(key);
  for (const auto& [key, c] : u.theta.terms) acc += weight(key) * c * c * unit_mass<S>(key);
  return acc;
}

template <typename S>
double sobolev_norm(const StateVector<S>& u, int k) {
  return std::sqrt(kTorusVolume * to_double(sobolev_norm_sq_unit(u, k)));
}

}  // namespace pesat
