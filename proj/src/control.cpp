#include "pesat/control.hpp"

#include <cmath>
#include <limits>

#include "pesat/field_json.hpp"

namespace pesat {

Eigen::VectorXd velocity_part(const GalerkinModel& model, const Eigen::VectorXd& u) {
  Eigen::VectorXd out = u;
  out.head(model.space().dim_theta()).setZero();
  return out;
}

Eigen::VectorXd temperature_part(const GalerkinModel& model, const Eigen::VectorXd& u) {
  Eigen::VectorXd out = u;
  out.tail(model.space().dim_v()).setZero();
  return out;
}

namespace {

double h1(const GalerkinModel& model, const Eigen::VectorXd& x) { return model.space().sobolev_norm(x, 1); }

}  // namespace

Eigen::VectorXd f_map(const GalerkinModel& model, const Eigen::VectorXd& u, const Eigen::VectorXd& xi) {
  const Eigen::VectorXd qxi = model.q_matrix() * xi;
  // b((a, 0), (0, xi)) = (0, B2(a, xi))
  const Eigen::VectorXd psi = model.b(velocity_part(model, u) - 0.5 * qxi, xi);
  return u - model.l_diag().cwiseProduct(xi) - psi - qxi;
}

double fit_order(const std::vector<ProbeRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (r.error_h1 > 0 && r.delta > 0) pts.emplace_back(std::log(r.delta), std::log(r.error_h1));
  }
  if (pts.size() < 2) throw Error(ErrorKind::DegenerateFit, "need at least two positive errors");
  double mx = 0, my = 0;
  for (auto [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (sxx == 0) throw Error(ErrorKind::DegenerateFit, "deltas must differ");
  return sxy / sxx;
}

nlohmann::json ProbeTable::to_json() const {
  nlohmann::json r = nlohmann::json::array();
  for (const auto& x : rows) r.push_back({{"delta", x.delta}, {"error_h1", x.error_h1}});
  return {{"rows", r}, {"alpha", alpha}, {"monotone", monotone}};
}

namespace {

ProbeTable finish(std::vector<ProbeRow> rows) {
  ProbeTable t;
  t.rows = std::move(rows);
  std::sort(t.rows.begin(), t.rows.end(), [](const auto& a, const auto& b) { return a.delta > b.delta; });
  t.monotone = true;
  for (std::size_t i = 1; i < t.rows.size(); ++i) t.monotone &= t.rows[i].error_h1 < t.rows[i - 1].error_h1;
  try {
    t.alpha = fit_order(t.rows);
  } catch (const Error&) {
    t.alpha = std::numeric_limits<double>::infinity();  // all errors vanish
  }
  return t;
}

}  // namespace

ProbeTable limit_probe_zeta(const GalerkinModel& model, const Eigen::VectorXd& u0, const Eigen::VectorXd& zeta,
                            const Eigen::VectorXd& eta, const std::vector<double>& deltas, int steps_per_delta) {
  PESAT_DEMAND(temperature_part(model, zeta).isZero(0.0), ErrorKind::PreconditionViolation,
               "zeta must have no temperature part");
  const Eigen::VectorXd limit = u0 + eta - model.B(zeta);
  std::vector<ProbeRow> rows;
  for (double d : deltas) {
    Segment s;
    s.duration = d;
    s.zeta = zeta / std::sqrt(d);
    s.eta = eta / d;
    s.min_steps = steps_per_delta;
    rows.push_back({d, h1(model, model.flow(u0, {s}) - limit)});
  }
  return finish(std::move(rows));
}

ProbeTable limit_probe_xi(const GalerkinModel& model, const Eigen::VectorXd& u0, const Eigen::VectorXd& xi,
                          const std::vector<double>& deltas, int steps_per_delta) {
  PESAT_DEMAND(velocity_part(model, xi).isZero(0.0), ErrorKind::PreconditionViolation,
               "xi must have no velocity part");
  const Eigen::VectorXd limit = f_map(model, u0, xi);
  std::vector<ProbeRow> rows;
  for (double d : deltas) {
    Segment s;
    s.duration = d;
    s.zeta = xi / d;
    s.min_steps = steps_per_delta;
    rows.push_back({d, h1(model, model.flow(u0, {s}) - limit)});
  }
  return finish(std::move(rows));
}

double ControlSchedule::total_time() const {
  double t = 0;
  for (const auto& e : entries) t += e.duration;
  return t;
}

void ControlSchedule::append(const ControlSchedule& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

double ControlSchedule::max_magnitude() const {
  double m = 0;
  for (const auto& e : entries) {
    if (!e.jump && e.eta.size()) m = std::max(m, e.eta.norm());
  }
  return m;
}

double ControlSchedule::min_duration() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) {
    if (!e.jump) m = std::min(m, e.duration);
  }
  return m;
}

nlohmann::json ControlSchedule::to_json(const GalerkinModel& model) const {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j{{"duration", e.duration}, {"min_steps", e.min_steps}, {"jump", e.jump}};
    if (e.jump) {
      j["shift"] = pesat::to_json(model.field(e.shift));
    } else if (e.eta.size()) {
      j["value"] = pesat::to_json(model.field(e.eta));
    } else {
      j["value"] = nullptr;
    }
    segs.push_back(std::move(j));
  }
  return {{"segments", segs}, {"total_time", total_time()}};
}

Eigen::VectorXd apply(const GalerkinModel& model, const Eigen::VectorXd& u, const ControlSchedule& s) {
  Eigen::VectorXd x = u;
  for (const auto& e : s.entries) {
    if (e.jump) {
      x += e.shift;
      continue;
    }
    Segment seg;
    seg.duration = e.duration;
    seg.eta = e.eta;
    seg.min_steps = e.min_steps;
    x = model.flow(x, {seg});
  }
  return x;
}

ControlSchedule impulse(const Eigen::VectorXd& e, double a, double eps, int steps) {
  PESAT_DEMAND(eps > 0, ErrorKind::PreconditionViolation, "impulse duration must be positive");
  ControlSchedule out;
  out.entries.push_back({eps, (a / eps) * e, steps, false, {}});
  return out;
}

namespace {

ControlSchedule shift(const Eigen::VectorXd& by, const MoveSettings& s) {
  if (s.exact_shifts) {
    ControlSchedule out;
    out.entries.push_back({0.0, {}, 0, true, by});
    return out;
  }
  return impulse(by, 1.0, s.eps_ratio * s.delta, s.impulse_steps);
}

ControlSchedule flow(double duration, int steps) {
  ControlSchedule out;
  out.entries.push_back({duration, {}, steps, false, {}});
  return out;
}

}  // namespace

ControlSchedule f_move(const Eigen::VectorXd& xi, const MoveSettings& s) {
  ControlSchedule out;
  if (xi.isZero(0.0)) return out;
  out.append(shift(xi / s.delta, s));
  out.append(flow(s.delta, s.steps_per_delta));
  out.append(shift(-xi / s.delta, s));
  return out;
}

ControlSchedule bracket_move(const Eigen::VectorXd& xi1, const Eigen::VectorXd& xi2, const MoveSettings& s) {
  ControlSchedule out;
  out.append(f_move(xi1, s));
  out.append(f_move(xi2, s));
  out.append(f_move(-xi1, s));
  out.append(f_move(-xi2, s));
  return out;
}

ControlSchedule velocity_shift(const GalerkinModel& model, const Eigen::VectorXd& preimage, double scale,
                               const MoveSettings& s) {
  if (s.exact_shifts) {
    ControlSchedule out;
    out.entries.push_back({0.0, {}, 0, true, scale * (model.q_matrix() * preimage)});
    return out;
  }
  // F_{-scale x} adds scale (L x + Q x) up to the quadratic term.
  ControlSchedule out = f_move(-scale * preimage, s);
  out.append(impulse(model.l_diag().cwiseProduct(preimage), -scale, s.eps_ratio * s.delta, s.impulse_steps));
  return out;
}

ControlSchedule b_move(const GalerkinModel& model, const Eigen::VectorXd& zeta, const Eigen::VectorXd& preimage,
                       const MoveSettings& s, const MoveSettings& inner) {
  ControlSchedule out;
  if (zeta.isZero(0.0)) return out;
  const double k = 1.0 / std::sqrt(s.delta);
  if (inner.exact_shifts) {
    out.entries.push_back({0.0, {}, 0, true, k * zeta});
    out.append(flow(s.delta, s.steps_per_delta));
    out.entries.push_back({0.0, {}, 0, true, -k * zeta});
    return out;
  }
  PESAT_DEMAND((model.q_matrix() * preimage - zeta).norm() <= 1e-9 * (1 + zeta.norm()), ErrorKind::PreconditionViolation,
               "zeta must equal Q applied to the preimage");
  out.append(velocity_shift(model, preimage, k, inner));
  out.append(flow(s.delta, s.steps_per_delta));
  out.append(velocity_shift(model, preimage, -k, inner));
  return out;
}

MeasuredMove measured_f_move(const GalerkinModel& model, const Eigen::VectorXd& u, const Eigen::VectorXd& xi,
                             MoveSettings s, double budget, int max_halvings) {
  const Eigen::VectorXd expected = f_map(model, u, xi);
  for (int h = 0;; ++h) {
    MeasuredMove m;
    m.schedule = f_move(xi, s);
    m.state = apply(model, u, m.schedule);
    m.error = h1(model, m.state - expected);
    m.delta = s.delta;
    m.halvings = h;
    if (m.error <= budget) return m;
    if (h == max_halvings) {
      throw Error(ErrorKind::BudgetExceeded, "F-move error " + std::to_string(m.error) + " exceeds budget " +
                                                 std::to_string(budget));
    }
    s.delta /= 2;
  }
}

MeasuredMove measured_bracket_move(const GalerkinModel& model, const Eigen::VectorXd& u, const Eigen::VectorXd& xi1,
                                   const Eigen::VectorXd& xi2, MoveSettings s, double budget, int max_halvings) {
  const Eigen::VectorXd expected =
      f_map(model, f_map(model, f_map(model, f_map(model, u, xi1), xi2), -xi1), -xi2);
  MeasuredMove out;
  out.state = u;
  out.delta = s.delta;
  const Eigen::VectorXd seq[4] = {xi1, xi2, -xi1, -xi2};
  for (const auto& xi : seq) {
    MeasuredMove child = measured_f_move(model, out.state, xi, s, budget / 8, max_halvings);
    out.schedule.append(child.schedule);
    out.state = child.state;
    out.delta = std::min(out.delta, child.delta);
    out.halvings = std::max(out.halvings, child.halvings);
  }
  out.error = h1(model, out.state - expected);
  if (out.error > budget) {
    throw Error(ErrorKind::BudgetExceeded, "bracket move error " + std::to_string(out.error) + " exceeds budget " +
                                               std::to_string(budget));
  }
  return out;
}

std::vector<Move> move_library(const GalerkinModel& model, const std::vector<Eigen::VectorXd>& controls,
                               const MoveSettings& s) {
  std::vector<Move> out;
  const int n = static_cast<int>(controls.size());
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.dim());
  for (int i = 0; i < n; ++i) out.push_back({MoveKind::Impulse, i, -1, controls[i], "impulse(" + std::to_string(i + 1) + ")"});
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd d = -(model.l_diag().cwiseProduct(controls[i]) + model.q_matrix() * controls[i]);
    if (velocity_part(model, d).norm() < 1e-12) continue;
    out.push_back({MoveKind::QMove, i, -1, d, "q_move(" + std::to_string(i + 1) + ")"});
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Eigen::VectorXd d =
          f_map(model, f_map(model, f_map(model, f_map(model, zero, controls[i]), controls[j]), -controls[i]),
                -controls[j]);
      if (d.norm() < 1e-12) continue;
      out.push_back({MoveKind::Bracket, i, j, d,
                     "bracket(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")"});
    }
  }
  // Linear part of F_-x S_w F_x at 0, by a central difference in the amplitude.
  const double a = 1e-3;
  auto drift = [&](const Eigen::VectorXd& x) {
    return f_map(model, model.free_flow(f_map(model, zero, x), s.drift_window), -x);
  };
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd d = (drift(a * controls[i]) - drift(-a * controls[i])) / (2 * a);
    if (d.norm() < 1e-12) continue;
    out.push_back({MoveKind::DriftBracket, i, -1, d, "drift(" + std::to_string(i + 1) + ")"});
  }
  return out;
}

ControlSchedule realize(const Move& m, double amplitude, const std::vector<Eigen::VectorXd>& controls,
                        const MoveSettings& s) {
  switch (m.kind) {
    case MoveKind::Impulse:
      return impulse(controls[m.i], amplitude, s.eps_ratio * s.delta, s.impulse_steps);
    case MoveKind::QMove:
      return f_move(amplitude * controls[m.i], s);
    case MoveKind::Bracket: {
      const double r = std::sqrt(std::abs(amplitude));
      return bracket_move(r * controls[m.i], (amplitude < 0 ? -r : r) * controls[m.j], s);
    }
    case MoveKind::DriftBracket: {
      ControlSchedule out = f_move(amplitude * controls[m.i], s);
      out.append(flow(s.drift_window, 1));
      out.append(f_move(-amplitude * controls[m.i], s));
      return out;
    }
  }
  return {};
}

nlohmann::json SteeringReport::to_json(const GalerkinModel& model) const {
  return {{"target", pesat::to_json(model.field(target))},
          {"achieved", pesat::to_json(model.field(achieved))},
          {"error_L2", error_l2},
          {"error_H1", error_h1},
          {"target_norm", target_norm},
          {"unreachable", unreachable},
          {"schedule_stats", {{"max_control_magnitude", max_control}, {"min_segment_duration", min_segment},
                              {"burst_duration", burst_duration}}},
          {"moves", moves},
          {"amplitudes", amplitudes},
          {"iteration_errors", iteration_errors},
          {"schedule", schedule.to_json(model)}};
}

namespace {

// Greedy column selection followed by least squares.
std::vector<int> select_columns(const Eigen::MatrixXd& D, const Eigen::VectorXd& d, int max_cols, double tol) {
  std::vector<int> chosen;
  Eigen::VectorXd r = d;
  const Eigen::VectorXd norms = D.colwise().norm();
  while (static_cast<int>(chosen.size()) < max_cols && r.norm() > tol * d.norm()) {
    int best = -1;
    double best_score = 0;
    for (int k = 0; k < D.cols(); ++k) {
      if (std::find(chosen.begin(), chosen.end(), k) != chosen.end()) continue;
      const double score = std::abs(D.col(k).dot(r)) / norms[k];
      if (score > best_score * (1 + 1e-12)) {
        best_score = score;
        best = k;
      }
    }
    if (best < 0 || best_score <= 1e-14 * d.norm()) break;
    chosen.push_back(best);
    Eigen::MatrixXd sub(D.rows(), static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t c = 0; c < chosen.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = D.col(chosen[c]);
    r = d - sub * sub.colPivHouseholderQr().solve(d);
  }
  return chosen;
}

}  // namespace

SteeringReport steer(const GalerkinModel& model, const Eigen::VectorXd& u0, const Eigen::VectorXd& target, double T,
                     double eps, const std::vector<Eigen::VectorXd>& controls, const SteerSettings& s) {
  PESAT_DEMAND(T > 0 && eps > 0, ErrorKind::PreconditionViolation, "horizon and tolerance must be positive");
  const std::vector<Move> lib = move_library(model, controls, s.moves);
  Eigen::MatrixXd D(model.dim(), static_cast<Eigen::Index>(lib.size()));
  for (std::size_t k = 0; k < lib.size(); ++k) D.col(static_cast<Eigen::Index>(k)) = lib[k].direction;

  SteeringReport rep;
  rep.target = target;
  rep.target_norm = target.norm();

  // Moves are chosen against the uncontrolled endpoint, then amplitudes are
  // refit once the burst length is known.
  const Eigen::VectorXd free_end = model.free_flow(u0, T);
  const Eigen::VectorXd d0 = target - free_end;
  const double tol = 1e-9;
  std::vector<int> chosen;
  if (d0.norm() > 0) chosen = select_columns(D, d0, s.max_moves, tol);
  Eigen::MatrixXd sub(model.dim(), static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t c = 0; c < chosen.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = D.col(chosen[c]);
  rep.unreachable = chosen.empty() ? d0.norm() : (d0 - sub * sub.colPivHouseholderQr().solve(d0)).norm();
  if (rep.unreachable > eps * rep.target_norm) {
    throw Error(ErrorKind::NotInSpan, "correction has a part of norm " + std::to_string(rep.unreachable) +
                                          " outside the move span");
  }
  // Drift brackets first, then brackets, Q-moves and impulses.
  auto ordered = [&] {
    std::vector<std::size_t> order(chosen.size());
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return static_cast<int>(lib[chosen[x]].kind) > static_cast<int>(lib[chosen[y]].kind);
    });
    return order;
  };
  auto burst = [&](const Eigen::VectorXd& amps) {
    ControlSchedule out;
    for (std::size_t c : ordered()) {
      out.append(realize(lib[chosen[c]], amps[static_cast<Eigen::Index>(c)], controls, s.moves));
    }
    return out;
  };
  auto start_for = [&](double tau) {
    PESAT_DEMAND(tau < T, ErrorKind::BudgetExceeded, "burst is longer than the horizon");
    return model.free_flow(u0, T - tau);
  };

  Eigen::VectorXd amps = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(chosen.size()));
  double tau = chosen.empty() ? 0.0 : burst(amps).total_time();
  Eigen::VectorXd start = start_for(tau);
  if (!chosen.empty()) amps = sub.colPivHouseholderQr().solve(target - start);

  Eigen::VectorXd best_amps = amps, best_state;
  std::vector<int> best_chosen = chosen;
  double best_err = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= s.correction_iterations; ++it) {
    const ControlSchedule bs = chosen.empty() ? ControlSchedule{} : burst(amps);
    // Zero amplitudes drop segments, so the burst length can move.
    if (bs.total_time() != tau) {
      tau = bs.total_time();
      start = start_for(tau);
    }
    const Eigen::VectorXd end = apply(model, start, bs);
    const Eigen::VectorXd r = target - end;
    rep.iteration_errors.push_back(r.norm());
    if (r.norm() < best_err) {
      best_err = r.norm();
      best_amps = amps;
      best_state = end;
      best_chosen = chosen;
    }
    if (chosen.empty() || it == s.correction_iterations) break;
    // Realization errors can leave the selected moves; widen the selection.
    Eigen::VectorXd outside = r - sub * sub.colPivHouseholderQr().solve(r);
    if (outside.norm() > 0.1 * r.norm() && static_cast<int>(chosen.size()) < s.max_moves) {
      Eigen::MatrixXd rest = D;
      for (int c : chosen) rest.col(c).setZero();
      const std::vector<int> extra =
          select_columns(rest, outside, s.max_moves - static_cast<int>(chosen.size()), 0.1);
      if (!extra.empty()) {
        chosen.insert(chosen.end(), extra.begin(), extra.end());
        sub.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(chosen.size()));
        for (std::size_t c = 0; c < chosen.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = D.col(chosen[c]);
        amps.conservativeResize(static_cast<Eigen::Index>(chosen.size()));
        amps.tail(static_cast<Eigen::Index>(extra.size())).setZero();
      }
    }
    amps += sub.colPivHouseholderQr().solve(r);
  }
  chosen = best_chosen;
  amps = best_amps;
  tau = chosen.empty() ? 0.0 : burst(amps).total_time();

  ControlSchedule full;
  if (T - tau > 0) full.entries.push_back({T - tau, {}, 1, false, {}});
  if (!chosen.empty()) full.append(burst(amps));
  rep.schedule = full;
  rep.achieved = best_state;
  rep.error_l2 = best_err;
  rep.error_h1 = h1(model, best_state - target);
  rep.max_control = full.max_magnitude();
  rep.min_segment = full.min_duration();
  rep.burst_duration = tau;
  for (std::size_t c : ordered()) {
    rep.moves.push_back(lib[chosen[c]].label);
    rep.amplitudes.push_back(amps[static_cast<Eigen::Index>(c)]);
  }
  return rep;
}

}  // namespace pesat
