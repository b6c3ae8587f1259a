#include "pesat/mode_space.hpp"

namespace pesat {

ModeSpace::ModeSpace(Truncation t) : trunc_(t) {
  std::vector<std::pair<int, int>> wavevectors;
  for (int m2 = 1; m2 <= t.M; ++m2) wavevectors.emplace_back(0, m2);
  for (int m1 = 1; m1 <= t.M; ++m1) {
    for (int m2 = -t.M; m2 <= t.M; ++m2) wavevectors.emplace_back(m1, m2);
  }

  for (int p = 1; p <= t.P; ++p) elements_.push_back({{0, 0, Phase::C, p, Phase::S}, Slot::Theta});
  for (auto [m1, m2] : wavevectors) {
    for (Phase h : {Phase::C, Phase::S}) {
      for (int p = 1; p <= t.P; ++p) elements_.push_back({{m1, m2, h, p, Phase::S}, Slot::Theta});
    }
  }
  dim_theta_ = dim();

  for (int p = 1; p <= t.P; ++p) {
    const TrigKey k{0, 0, Phase::C, p, Phase::C};
    elements_.push_back({k, Slot::Iota, 1, 0});
    elements_.push_back({k, Slot::Jota, 0, 1});
  }
  for (auto [m1, m2] : wavevectors) {
    for (Phase h : {Phase::C, Phase::S}) {
      for (int p = 0; p <= t.P; ++p) {
        const TrigKey k{m1, m2, h, p, Phase::C};
        if (p > 0) elements_.push_back({k, Slot::AlongM, m1, m2});
        elements_.push_back({k, Slot::AlongPerp, -m2, m1});
      }
    }
  }

  weight_.resize(dim());
  norms_.resize(dim());
  for (int i = 0; i < dim(); ++i) {
    const BasisElement& e = elements_[i];
    const double mass = kTorusVolume * to_double(unit_mass<Rational>(e.key));
    const double dir_sq = e.slot == Slot::Theta ? 1.0 : double(e.dir1 * e.dir1 + e.dir2 * e.dir2);
    norms_[i] = std::sqrt(mass * dir_sq);
    weight_[i] = 1.0 + e.key.wavenumber_sq() + e.key.p * e.key.p;
    if (e.slot == Slot::Theta) {
      theta_index_.emplace(e.key, i);
    } else {
      v_index_.try_emplace(e.key, i);
    }
  }
}

Eigen::VectorXd ModeSpace::orthonormal(const DState& u) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim());
  for (const auto& [i, c] : coordinates(u)) {
    // <u, f_i> / |f_i| with <u, f_i> = mass * (c . dir) and |f_i|^2 = mass |dir|^2
    const double mass = kTorusVolume * unit_mass<double>(elements_[i].key);
    x[i] = mass * c / norms_[i];
  }
  return x;
}

DState ModeSpace::basis_field(int i) const {
  const BasisElement& e = elements_[i];
  DState u;
  if (e.slot == Slot::Theta) {
    u.theta.add(e.key, 1.0);
  } else {
    u.v.add(e.key, double(e.dir1), double(e.dir2));
  }
  return u;
}

DState ModeSpace::field(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  DState u;
  for (int i = 0; i < dim(); ++i) {
    if (x[i] == 0.0) continue;
    const BasisElement& e = elements_[i];
    const double c = x[i] / norms_[i];
    if (e.slot == Slot::Theta) {
      u.theta.add(e.key, c);
    } else {
      u.v.add(e.key, c * e.dir1, c * e.dir2);
    }
  }
  return u;
}

double ModeSpace::sobolev_norm(const Eigen::Ref<const Eigen::VectorXd>& x, int k) const {
  return std::sqrt((weight_.array().pow(k) * x.array().square()).sum());
}

int ModeSpace::index_of(const TrigKey& key, Slot slot) const {
  if (slot == Slot::Theta) {
    auto it = theta_index_.find(key);
    return it == theta_index_.end() ? -1 : it->second;
  }
  auto it = v_index_.find(key);
  if (it == v_index_.end()) return -1;
  for (int i = it->second; i < dim() && elements_[i].key == key; ++i) {
    if (elements_[i].slot == slot) return i;
  }
  return -1;
}

}  // namespace pesat
