#include "pesat/galerkin.hpp"

#include <cmath>

namespace pesat {

const char* to_string(Scheme s) {
  return s == Scheme::SemiImplicitEuler ? "semi_implicit_euler" : "imex_rk2";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "semi_implicit_euler") return Scheme::SemiImplicitEuler;
  if (s == "imex_rk2") return Scheme::ImexRk2;
  throw Error(ErrorKind::ConfigError, "unknown scheme '" + s + "'");
}

GalerkinModel::GalerkinModel(const GalerkinConfig& cfg) : cfg_(cfg), space_(cfg.trunc) {
  PESAT_DEMAND(cfg.dt > 0, ErrorKind::ConfigError, "dt must be positive");
  PESAT_DEMAND(cfg.trunc.M >= 1 && cfg.trunc.P >= 1, ErrorKind::ConfigError, "truncation must be at least (1,1)");
  const int n = space_.dim();
  const auto& prm = cfg.params;

  l_diag_.resize(n);
  std::vector<DState> basis(n);
  for (int i = 0; i < n; ++i) {
    const BasisElement& e = space_.element(i);
    const double m2 = e.key.wavenumber_sq(), p2 = double(e.key.p) * e.key.p;
    l_diag_[i] = e.slot == Slot::Theta ? prm.nu2 * m2 + prm.mu2 * p2 : prm.nu1 * m2 + prm.mu1 * p2;
    basis[i] = (1.0 / space_.basis_norm(i)) * space_.basis_field(i);
  }

  q_ = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) q_.col(j) = space_.orthonormal(op_Q(basis[j], prm.f));

  h_ = space_.orthonormal(prm.h);

  pair_begin_.push_back(0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const DState out = i == j ? op_B(basis[i]) : op_b(basis[i], basis[j]);
      const auto c = space_.coordinates(out);
      bool any = false;
      for (const auto& [k, val] : c) {
        // coordinates are against unnormalized directions; convert to orthonormal
        const double mass = kTorusVolume * unit_mass<double>(space_.element(k).key);
        const double x = mass * val / space_.basis_norm(k);
        if (std::abs(x) < 1e-15) continue;
        out_index_.push_back(k);
        out_value_.push_back(x);
        any = true;
      }
      if (any) {
        pair_i_.push_back(i);
        pair_j_.push_back(j);
        pair_begin_.push_back(static_cast<int>(out_index_.size()));
      }
    }
  }
}

Eigen::VectorXd GalerkinModel::B(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
  for (std::size_t p = 0; p < pair_i_.size(); ++p) {
    const double s = x[pair_i_[p]] * x[pair_j_[p]];
    if (s == 0.0) continue;
    for (int k = pair_begin_[p]; k < pair_begin_[p + 1]; ++k) out[out_index_[k]] += s * out_value_[k];
  }
  return out;
}

Eigen::VectorXd GalerkinModel::b(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
  for (std::size_t p = 0; p < pair_i_.size(); ++p) {
    const int i = pair_i_[p], j = pair_j_[p];
    const double s = i == j ? 2.0 * x[i] * y[i] : x[i] * y[j] + x[j] * y[i];
    if (s == 0.0) continue;
    for (int k = pair_begin_[p]; k < pair_begin_[p + 1]; ++k) out[out_index_[k]] += s * out_value_[k];
  }
  return out;
}

Eigen::MatrixXd GalerkinModel::b_matrix(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim(), dim());
  for (std::size_t p = 0; p < pair_i_.size(); ++p) {
    const int i = pair_i_[p], j = pair_j_[p];
    const double xi = x[i], xj = x[j];
    if (xi == 0.0 && xj == 0.0) continue;
    for (int k = pair_begin_[p]; k < pair_begin_[p + 1]; ++k) {
      const int r = out_index_[k];
      const double v = out_value_[k];
      if (i == j) {
        out(r, i) += 2.0 * xi * v;
      } else {
        out(r, j) += xi * v;
        out(r, i) += xj * v;
      }
    }
  }
  return out;
}

Eigen::VectorXd GalerkinModel::explicit_part(const Eigen::VectorXd& u, const Eigen::VectorXd& zeta,
                                             const Eigen::VectorXd& eta) const {
  Eigen::VectorXd w = u;
  Eigen::VectorXd out = h_;
  if (zeta.size()) {
    w += zeta;
    out -= l_diag_.cwiseProduct(zeta);
  }
  out -= B(w) + q_ * w;
  if (eta.size()) out += eta;
  return out;
}

Eigen::VectorXd GalerkinModel::rhs(const Eigen::VectorXd& u, const Eigen::VectorXd& zeta,
                                   const Eigen::VectorXd& eta) const {
  return explicit_part(u, zeta, eta) - l_diag_.cwiseProduct(u);
}

Eigen::VectorXd GalerkinModel::step(const Eigen::VectorXd& u, const Eigen::VectorXd& zeta,
                                    const Eigen::VectorXd& eta, double h) const {
  const Eigen::VectorXd k1 = explicit_part(u, zeta, eta);
  Eigen::VectorXd out;
  if (cfg_.scheme == Scheme::SemiImplicitEuler) {
    out = (u + h * k1).cwiseQuotient((1.0 + h * l_diag_.array()).matrix());
  } else {
    const Eigen::VectorXd u1 = (u + h * k1).cwiseQuotient((1.0 + h * l_diag_.array()).matrix());
    const Eigen::VectorXd k2 = explicit_part(u1, zeta, eta);
    out = (u + 0.5 * h * (k1 + k2) - 0.5 * h * l_diag_.cwiseProduct(u))
              .cwiseQuotient((1.0 + 0.5 * h * l_diag_.array()).matrix());
  }
  const double norm = out.norm();
  if (!std::isfinite(norm) || norm > cfg_.blowup) {
    throw Error(ErrorKind::StepUnstable, "state norm " + std::to_string(norm) + " exceeds the guard");
  }
  return out;
}

int GalerkinModel::steps_for(const Segment& s) const {
  PESAT_DEMAND(s.duration > 0, ErrorKind::PreconditionViolation, "segment duration must be positive");
  const int by_dt = static_cast<int>(std::ceil(s.duration / cfg_.dt - 1e-9));
  return std::max({by_dt, s.min_steps, 1});
}

Trajectory GalerkinModel::solve(const Eigen::VectorXd& u0, const std::vector<Segment>& segments,
                                bool keep_all) const {
  PESAT_DEMAND(u0.size() == dim(), ErrorKind::ShapeViolation, "initial state has the wrong dimension");
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(u0);
  Eigen::VectorXd u = u0;
  double t = 0.0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Segment& seg = segments[s];
    const int n = steps_for(seg);
    const double h = seg.duration / n;
    for (int k = 0; k < n; ++k) {
      u = step(u, seg.zeta, seg.eta, h);
      t += h;
      if (keep_all) {
        traj.times.push_back(t);
        traj.states.push_back(u);
        traj.segment.push_back(static_cast<int>(s));
      }
    }
  }
  if (!keep_all) {
    traj.times.push_back(t);
    traj.states.push_back(u);
    traj.segment.push_back(segments.empty() ? -1 : static_cast<int>(segments.size()) - 1);
  }
  return traj;
}

Eigen::VectorXd GalerkinModel::flow(const Eigen::VectorXd& u0, const std::vector<Segment>& segments) const {
  return solve(u0, segments, false).states.back();
}

Eigen::VectorXd GalerkinModel::free_flow(const Eigen::VectorXd& u0, double duration) const {
  if (duration <= 0) return u0;
  Segment s;
  s.duration = duration;
  return flow(u0, {s});
}

std::vector<double> energy_report(const Trajectory& traj, const GalerkinModel& model,
                                  const std::vector<Segment>& segments) {
  std::vector<double> out;
  const Eigen::VectorXd& lam = model.l_diag();
  const Eigen::MatrixXd& q = model.q_matrix();
  auto dissipation = [&](const Eigen::VectorXd& u) { return u.dot(lam.cwiseProduct(u)); };
  auto exchange = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& force) {
    return u.dot(q * u) - force.dot(u);
  };
  const bool trapezoid = model.config().scheme == Scheme::ImexRk2;
  for (std::size_t n = 0; n + 1 < traj.states.size(); ++n) {
    const Segment* seg = traj.segment.empty() || traj.segment[n] < 0 ? nullptr : &segments.at(traj.segment[n]);
    PESAT_DEMAND(!seg || seg->zeta.size() == 0 || seg->zeta.isZero(0.0), ErrorKind::PreconditionViolation,
                 "energy balance requires zeta = 0");
    Eigen::VectorXd force = model.forcing();
    if (seg && seg->eta.size()) force += seg->eta;
    const Eigen::VectorXd& a = traj.states[n];
    const Eigen::VectorXd& b = traj.states[n + 1];
    const double dt = traj.times[n + 1] - traj.times[n];
    const double de = 0.5 * (b.squaredNorm() - a.squaredNorm()) / dt;
    // Euler treats L at the new state and everything else at the old one.
    const double rest = trapezoid ? 0.5 * (dissipation(a) + dissipation(b) + exchange(a, force) + exchange(b, force))
                                  : dissipation(b) + exchange(a, force);
    out.push_back(de + rest);
  }
  return out;
}

}  // namespace pesat

namespace pesat {

double energy_scale(const Trajectory& traj, const GalerkinModel& model) {
  double out = 0.0;
  for (const auto& u : traj.states) out = std::max(out, model.l_diag().cwiseProduct(u).squaredNorm());
  return out;
}

}  // namespace pesat
