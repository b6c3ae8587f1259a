#include "pesat/gramian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Eigenvalues>

namespace pesat {

Eigen::VectorXd LinearizedSystem::reference_at(double t) const {
  const auto& ts = reference.times;
  if (t <= ts.front()) return reference.states.front();
  if (t >= ts.back()) return reference.states.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - ts.begin());
  const double a = ts[k - 1], b = ts[k];
  const double f = (t - a) / (b - a);
  return (1 - f) * reference.states[k - 1] + f * reference.states[k];
}

int LinearizedSystem::index_of(double t) const {
  const auto& ts = reference.times;
  const auto it = std::lower_bound(ts.begin(), ts.end(), t - 1e-9 * dt());
  PESAT_DEMAND(it != ts.end() && std::abs(*it - t) <= 1e-9 * dt() + 1e-12, ErrorKind::PreconditionViolation,
               "time is not on the reference grid");
  return static_cast<int>(it - ts.begin());
}

LinearizedSystem make_linearized(const GalerkinModel& model, Trajectory reference,
                                 const std::vector<Eigen::VectorXd>& directions) {
  LinearizedSystem sys;
  sys.model = &model;
  sys.reference = std::move(reference);
  Eigen::MatrixXd d(model.dim(), static_cast<Eigen::Index>(directions.size()));
  for (std::size_t i = 0; i < directions.size(); ++i) d.col(static_cast<Eigen::Index>(i)) = directions[i];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d);
  qr.setThreshold(1e-12);
  const Eigen::Index r = qr.rank();
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(model.dim(), r);
  sys.controls = q;
  return sys;
}

Eigen::VectorXd lin_rhs(const GalerkinModel& model, const Eigen::VectorXd& ref, const Eigen::VectorXd& w) {
  return -model.l_diag().cwiseProduct(w) - model.b(ref, w) - model.q_matrix() * w;
}

namespace {

// -b(ref, w) - Q w, i.e. the explicit part of the linearized operator.
Eigen::VectorXd lin_explicit(const GalerkinModel& m, const Eigen::VectorXd& ref, const Eigen::VectorXd& w) {
  return -m.b(ref, w) - m.q_matrix() * w;
}

}  // namespace

Eigen::VectorXd lin_solve(const LinearizedSystem& sys, const Eigen::VectorXd& w0, const ControlPath& g, double t0,
                          double t1) {
  const GalerkinModel& m = *sys.model;
  const int n0 = sys.index_of(t0), n1 = sys.index_of(t1);
  const Eigen::ArrayXd lam = m.l_diag().array();
  Eigen::VectorXd w = w0;
  for (int n = n0; n < n1; ++n) {
    const double h = sys.reference.times[n + 1] - sys.reference.times[n];
    Eigen::VectorXd force = Eigen::VectorXd::Zero(m.dim());
    if (g) force = g(sys.reference.times[n]);
    const Eigen::VectorXd k1 = lin_explicit(m, sys.reference.states[n], w) + force;
    const Eigen::VectorXd w1 = ((w + h * k1).array() / (1 + h * lam)).matrix();
    if (m.config().scheme == Scheme::SemiImplicitEuler) {
      w = w1;
    } else {
      const Eigen::VectorXd k2 = lin_explicit(m, sys.reference.states[n + 1], w1) + force;
      w = ((w + 0.5 * h * (k1 + k2) - 0.5 * h * m.l_diag().cwiseProduct(w)).array() / (1 + 0.5 * h * lam)).matrix();
    }
    PESAT_DEMAND(std::isfinite(w.norm()) && w.norm() <= m.config().blowup, ErrorKind::StepUnstable,
                 "linearized solution exceeds the guard");
  }
  return w;
}

Eigen::MatrixXd step_matrix(const LinearizedSystem& sys, int n) {
  const GalerkinModel& m = *sys.model;
  const int d = m.dim();
  const double h = sys.reference.times[n + 1] - sys.reference.times[n];
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  const Eigen::ArrayXd lam = m.l_diag().array();
  const Eigen::MatrixXd k1 = -(m.b_matrix(sys.reference.states[n]) + m.q_matrix());
  const Eigen::MatrixXd stage = (1.0 / (1 + h * lam)).matrix().asDiagonal() * (id + h * k1);
  if (m.config().scheme == Scheme::SemiImplicitEuler) return stage;
  const Eigen::MatrixXd k2 = -(m.b_matrix(sys.reference.states[n + 1]) + m.q_matrix());
  Eigen::MatrixXd inner = 0.5 * h * (k1 + k2 * stage);
  inner.diagonal().array() += 1.0 - 0.5 * h * lam;
  return (1.0 / (1 + 0.5 * h * lam)).matrix().asDiagonal() * inner;
}

Eigen::VectorXd adjoint_solve(const LinearizedSystem& sys, const Eigen::VectorXd& wT, double t1, double t0) {
  const int n0 = sys.index_of(t0), n1 = sys.index_of(t1);
  Eigen::VectorXd p = wT;
  for (int n = n1 - 1; n >= n0; --n) {
    p = step_matrix(sys, n).transpose() * p;
    PESAT_DEMAND(std::isfinite(p.norm()) && p.norm() <= sys.model->config().blowup, ErrorKind::StepUnstable,
                 "adjoint solution exceeds the guard");
  }
  return p;
}

GramianResult analyze(Eigen::MatrixXd g, double rel_tolerance) {
  GramianResult r;
  r.matrix = 0.5 * (g + g.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.matrix, Eigen::EigenvaluesOnly);
  r.eigenvalues = es.eigenvalues();
  r.rel_tolerance = rel_tolerance;
  const double mx = r.eigenvalues.maxCoeff();
  r.min_over_max = mx > 0 ? r.eigenvalues.minCoeff() / mx : 0.0;
  r.rank = 0;
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
    if (mx > 0 && r.eigenvalues[i] > rel_tolerance * mx) ++r.rank;
  }
  return r;
}

namespace {

// Node grid indices and trapezoid weights on [0, tau].
void quadrature(const LinearizedSystem& sys, double tau, int ngrid, std::vector<int>& idx, std::vector<double>& w) {
  PESAT_DEMAND(ngrid >= 4, ErrorKind::PreconditionViolation, "ngrid must be at least 4");
  const int nt = sys.index_of(tau);
  PESAT_DEMAND(nt % (ngrid - 1) == 0, ErrorKind::PreconditionViolation,
               "tau/dt must be divisible by ngrid - 1 so that nodes fall on the step grid");
  const int stride = nt / (ngrid - 1);
  const double hq = sys.reference.times[stride] - sys.reference.times[0];
  for (int j = 0; j < ngrid; ++j) {
    idx.push_back(j * stride);
    w.push_back(j == 0 || j == ngrid - 1 ? 0.5 * hq : hq);
  }
}

}  // namespace

GramianResult gramian(const LinearizedSystem& sys, double tau, int ngrid) {
  std::vector<int> idx;
  std::vector<double> wts;
  quadrature(sys, tau, ngrid, idx, wts);
  const int d = sys.model->dim();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    Eigen::MatrixXd cols(d, sys.controls.cols());
    for (Eigen::Index c = 0; c < sys.controls.cols(); ++c) {
      cols.col(c) = lin_solve(sys, sys.controls.col(c), nullptr, sys.reference.times[idx[j]], tau);
    }
    g += wts[j] * cols * cols.transpose();
  }
  return analyze(std::move(g));
}

GramianResult gramian_adjoint(const LinearizedSystem& sys, double tau, int ngrid) {
  std::vector<int> idx;
  std::vector<double> wts;
  quadrature(sys, tau, ngrid, idx, wts);
  const int d = sys.model->dim();
  // p = R(tau, t)^* w0 for every basis w0 at once, swept backward.
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
  int node = static_cast<int>(idx.size()) - 1;
  for (int n = idx.back(); n >= 0; --n) {
    if (node >= 0 && n == idx[node]) {
      const Eigen::MatrixXd proj = sys.controls.transpose() * p;  // P_H p, per w0 column
      g += wts[node] * proj.transpose() * proj;
      --node;
    }
    if (n > 0) p = step_matrix(sys, n - 1).transpose() * p;
  }
  return analyze(std::move(g));
}

int shell_closure_dim(const ModeSpace& space, const Eigen::MatrixXd& controls) {
  auto shell = [&](int i) {
    TrigKey k = space.element(i).key;
    return std::array<int, 3>{k.m1, k.m2, k.p};
  };
  std::set<std::array<int, 3>> touched;
  for (Eigen::Index c = 0; c < controls.cols(); ++c) {
    for (int i = 0; i < space.dim(); ++i) {
      if (std::abs(controls(i, c)) > 1e-12) touched.insert(shell(i));
    }
  }
  int n = 0;
  for (int i = 0; i < space.dim(); ++i) n += touched.count(shell(i)) ? 1 : 0;
  return n;
}

nlohmann::json GramianResult::to_json(bool with_matrix) const {
  std::vector<double> ev(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  nlohmann::json out{{"eigenvalues", ev}, {"rank", rank}, {"rel_tolerance", rel_tolerance},
                     {"min_over_max", min_over_max}, {"dim", matrix.rows()}};
  if (with_matrix) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
      rows.emplace_back(matrix.row(i).data(), matrix.row(i).data() + matrix.cols());
    }
    out["matrix"] = rows;
  }
  return out;
}

nlohmann::json KernelCertificate::to_json() const {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& x : trials) {
    nlohmann::json row{{"kick", x.kick}, {"min_over_max", x.min_over_max}, {"rank", x.rank}, {"positive", x.positive}};
    row["doubling_change"] = std::isnan(x.doubling_change) ? nlohmann::json(nullptr) : nlohmann::json(x.doubling_change);
    t.push_back(std::move(row));
  }
  return {{"trials", t}, {"fraction", fraction}, {"min_floor", min_floor}};
}

DoublingCheck quadrature_doubling(const LinearizedSystem& sys, double tau, int ngrid, double rel_tolerance,
                                  bool adjoint) {
  auto run = [&](int n) {
    return analyze((adjoint ? gramian_adjoint(sys, tau, n) : gramian(sys, tau, n)).matrix, rel_tolerance);
  };
  const GramianResult a = run(ngrid), b = run(2 * ngrid - 1);
  DoublingCheck out;
  const double top = a.eigenvalues.maxCoeff();
  for (Eigen::Index i = 0; i < a.eigenvalues.size(); ++i) {
    if (a.eigenvalues[i] <= rel_tolerance * top) continue;
    out.max_rel_change = std::max(out.max_rel_change, std::abs(b.eigenvalues[i] - a.eigenvalues[i]) / a.eigenvalues[i]);
    ++out.compared;
  }
  return out;
}

KernelCertificate kernel_certificate(const GalerkinModel& model, const Eigen::VectorXd& u0,
                                     const std::vector<Eigen::VectorXd>& directions, const NoiseConfig& noise,
                                     double tau, int ngrid, int trials, double rel_tolerance, bool adjoint,
                                     bool check_doubling) {
  KernelCertificate cert;
  if (trials <= 0) return cert;
  int positive = 0;
  cert.min_floor = INFINITY;
  for (int k = 0; k < trials; ++k) {
    const NoisePath path = sample_kick(noise, static_cast<int>(directions.size()), static_cast<std::uint64_t>(k));
    std::vector<Segment> segs = kick_segments(path, directions, noise.amplitude);
    // keep only the part of the kick inside [0, tau]
    std::vector<Segment> within;
    double t = 0.0;
    for (auto& s : segs) {
      if (t >= tau - 1e-12) break;
      s.duration = std::min(s.duration, tau - t);
      t += s.duration;
      within.push_back(std::move(s));
    }
    const LinearizedSystem sys = make_linearized(model, model.solve(u0, within), directions);
    const GramianResult g =
        analyze((adjoint ? gramian_adjoint(sys, tau, ngrid) : gramian(sys, tau, ngrid)).matrix, rel_tolerance);
    const bool ok = g.min_over_max > rel_tolerance;
    positive += ok;
    cert.min_floor = std::min(cert.min_floor, g.min_over_max);
    const double change = check_doubling ? quadrature_doubling(sys, tau, ngrid, rel_tolerance, adjoint).max_rel_change
                                         : std::numeric_limits<double>::quiet_NaN();
    cert.trials.push_back({static_cast<std::uint64_t>(k), g.min_over_max, g.rank, ok, change});
  }
  cert.fraction = static_cast<double>(positive) / trials;
  return cert;
}

}  // namespace pesat
