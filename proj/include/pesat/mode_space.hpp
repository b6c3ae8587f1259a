#pragma once

// Truncated basis of the state space: temperature modes c_m sin pz, s_m sin pz,
// sin pz, and velocity modes along m, along m_perp and along the unit axes.

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pesat/field.hpp"

namespace pesat {

struct Truncation {
  int M = 2;
  int P = 2;

  bool contains(const TrigKey& k) const {
    return std::abs(k.m1) <= M && std::abs(k.m2) <= M && k.p <= P;
  }
  bool operator==(const Truncation&) const = default;
};

template <typename S>
ScalarField<S> project_trunc(const ScalarField<S>& f, const Truncation& t) {
  ScalarField<S> out;
  for (const auto& [k, c] : f.terms) {
    if (t.contains(k)) out.terms.emplace(k, c);
  }
  return out;
}

template <typename S>
VectorField<S> project_trunc(const VectorField<S>& f, const Truncation& t) {
  VectorField<S> out;
  for (const auto& [k, c] : f.terms) {
    if (t.contains(k)) out.terms.emplace(k, c);
  }
  return out;
}

template <typename S>
StateVector<S> project_trunc(const StateVector<S>& u, const Truncation& t) {
  return StateVector<S>{project_trunc(u.v, t), project_trunc(u.theta, t)};
}

template <typename S>
bool fits(const StateVector<S>& u, const Truncation& t) {
  for (const auto& [k, c] : u.v.terms) {
    if (!t.contains(k)) return false;
  }
  for (const auto& [k, c] : u.theta.terms) {
    if (!t.contains(k)) return false;
  }
  return true;
}

enum class Slot : std::uint8_t { Theta, AlongM, AlongPerp, Iota, Jota };

struct BasisElement {
  TrigKey key;
  Slot slot;
  int dir1 = 0;  // integer direction of the velocity part
  int dir2 = 0;
};

class ModeSpace {
 public:
  explicit ModeSpace(Truncation t);

  const Truncation& truncation() const { return trunc_; }
  int dim() const { return static_cast<int>(elements_.size()); }
  int dim_theta() const { return dim_theta_; }
  int dim_v() const { return dim() - dim_theta_; }
  const std::vector<BasisElement>& elements() const { return elements_; }
  const BasisElement& element(int i) const { return elements_[i]; }

  /// Coordinates against the unnormalized integer-direction basis; keys
  /// outside the truncation are ignored. Sorted by index.
  template <typename S>
  std::vector<std::pair<int, S>> coordinates(const StateVector<S>& u) const;

  /// Coordinates in the L2-orthonormal basis (true box measure).
  Eigen::VectorXd orthonormal(const DState& u) const;
  DState field(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// The unnormalized basis field of element i and its L2 norm.
  DState basis_field(int i) const;
  double basis_norm(int i) const { return norms_[i]; }

  /// 1 + |m|^2 + p^2 per element.
  const Eigen::VectorXd& sobolev_weight() const { return weight_; }
  double sobolev_norm(const Eigen::Ref<const Eigen::VectorXd>& x, int k) const;

  int index_of(const TrigKey& key, Slot slot) const;

 private:
  Truncation trunc_;
  std::vector<BasisElement> elements_;
  std::vector<double> norms_;
  Eigen::VectorXd weight_;
  int dim_theta_ = 0;
  std::map<TrigKey, int> theta_index_;
  std::map<TrigKey, int> v_index_;  // first of one or two consecutive slots
};

template <typename S>
std::vector<std::pair<int, S>> ModeSpace::coordinates(const StateVector<S>& u) const {
  std::vector<std::pair<int, S>> out;
  for (const auto& [k, c] : u.theta.terms) {
    auto it = theta_index_.find(k);
    if (it != theta_index_.end()) out.emplace_back(it->second, c);
  }
  for (const auto& [k, c] : u.v.terms) {
    auto it = v_index_.find(k);
    if (it == v_index_.end()) continue;
    for (int i = it->second; i < dim() && elements_[i].key == k; ++i) {
      const BasisElement& e = elements_[i];
      S value = S(e.dir1 * c[0] + e.dir2 * c[1]);
      if (!is_zero(value)) out.emplace_back(i, value);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace pesat
