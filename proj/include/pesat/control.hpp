#pragma once

// Limit regimes of fast controls and staged steering built from impulses,
// shift-flow-shift moves and their four-fold bracket compositions.

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pesat/galerkin.hpp"

namespace pesat {

// ---- limit probes ----

struct ProbeRow {
  double delta;
  double error_h1;
};

struct ProbeTable {
  std::vector<ProbeRow> rows;
  double alpha = 0.0;  // fitted log-log slope of error against delta
  bool monotone = false;

  nlohmann::json to_json() const;
};

/// log-log least squares slope; DegenerateFit if fewer than two positive errors.
double fit_order(const std::vector<ProbeRow>& rows);

/// || S_delta(u0, delta^-1/2 zeta, delta^-1 eta) - (u0 + eta - B(zeta)) ||_1; zeta has no temperature part.
ProbeTable limit_probe_zeta(const GalerkinModel& model, const Eigen::VectorXd& u0, const Eigen::VectorXd& zeta,
                            const Eigen::VectorXd& eta, const std::vector<double>& deltas, int steps_per_delta = 400);

/// || S_delta(u0, delta^-1 xi, 0) - F_xi(u0) ||_1; xi has no velocity part.
ProbeTable limit_probe_xi(const GalerkinModel& model, const Eigen::VectorXd& u0, const Eigen::VectorXd& xi,
                          const std::vector<double>& deltas, int steps_per_delta = 400);

/// u - L xi - (0, Psi(u, xi)) - Q xi in truncated coordinates.
Eigen::VectorXd f_map(const GalerkinModel& model, const Eigen::VectorXd& u, const Eigen::VectorXd& xi);

Eigen::VectorXd velocity_part(const GalerkinModel& model, const Eigen::VectorXd& u);
Eigen::VectorXd temperature_part(const GalerkinModel& model, const Eigen::VectorXd& u);

// ---- schedules ----

/// A piecewise-constant forcing segment, or (debug) an exact state jump.
struct ScheduleEntry {
  double duration = 0.0;
  Eigen::VectorXd eta;
  int min_steps = 1;
  bool jump = false;
  Eigen::VectorXd shift;
};

struct ControlSchedule {
  std::vector<ScheduleEntry> entries;

  double total_time() const;
  void append(const ControlSchedule& other);
  double max_magnitude() const;
  double min_duration() const;
  nlohmann::json to_json(const GalerkinModel& model) const;
};

Eigen::VectorXd apply(const GalerkinModel& model, const Eigen::VectorXd& u, const ControlSchedule& s);

struct MoveSettings {
  double delta = 1e-3;
  double eps_ratio = 1e-2;   // impulse duration as a fraction of delta
  int steps_per_delta = 400;
  int impulse_steps = 20;
  bool exact_shifts = false;  // debug: apply shifts as jumps
  double drift_window = 0.05;  // free flow between the halves of a drift bracket
};

/// Single segment of length eps carrying (a / eps) e.
ControlSchedule impulse(const Eigen::VectorXd& e, double a, double eps, int steps = 20);

/// Shift by xi / delta, flow for delta, shift back; realizes F_xi.
ControlSchedule f_move(const Eigen::VectorXd& xi, const MoveSettings& s);

/// F_{-xi2} F_{-xi1} F_{xi2} F_{xi1}: adds (0, frak_b2(xi1, xi2)).
ControlSchedule bracket_move(const Eigen::VectorXd& xi1, const Eigen::VectorXd& xi2, const MoveSettings& s);

/// Velocity shift by scale * Q x through an F-move on -scale * x, followed
/// by an impulse cancelling the accompanying -L term.
ControlSchedule velocity_shift(const GalerkinModel& model, const Eigen::VectorXd& preimage, double scale,
                               const MoveSettings& s);

/// Shift by delta^-1/2 zeta, flow delta, shift back: adds -B(zeta). Unless
/// shifts are exact, zeta = Q preimage must hold.
ControlSchedule b_move(const GalerkinModel& model, const Eigen::VectorXd& zeta, const Eigen::VectorXd& preimage,
                       const MoveSettings& s, const MoveSettings& inner);

struct MeasuredMove {
  ControlSchedule schedule;
  Eigen::VectorXd state;
  double error = 0.0;  // H1 distance to the exact move
  double delta = 0.0;
  int halvings = 0;
};

/// F-move from u, halving delta until the realized state is within `budget`
/// (H1) of F_xi(u); BudgetExceeded after `max_halvings`.
MeasuredMove measured_f_move(const GalerkinModel& model, const Eigen::VectorXd& u, const Eigen::VectorXd& xi,
                             MoveSettings s, double budget, int max_halvings = 4);

/// Bracket move with the budget split in half: its own limit error gets
/// budget/2 and each of the four F-moves budget/8.
MeasuredMove measured_bracket_move(const GalerkinModel& model, const Eigen::VectorXd& u, const Eigen::VectorXd& xi1,
                                   const Eigen::VectorXd& xi2, MoveSettings s, double budget, int max_halvings = 4);

// ---- steering ----

enum class MoveKind { Impulse, QMove, Bracket, DriftBracket };

struct Move {
  MoveKind kind;
  int i = -1, j = -1;         // control direction indices
  Eigen::VectorXd direction;  // first-order effect per unit amplitude
  std::string label;
};

/// Impulses, Q-moves, pairwise brackets and drift brackets (F_x, free flow,
/// F_-x) over the given temperature directions.
std::vector<Move> move_library(const GalerkinModel& model, const std::vector<Eigen::VectorXd>& controls,
                               const MoveSettings& s = {});

ControlSchedule realize(const Move& m, double amplitude, const std::vector<Eigen::VectorXd>& controls,
                        const MoveSettings& s);

struct SteerSettings {
  MoveSettings moves;
  int max_moves = 24;
  int correction_iterations = 6;
};

struct SteeringReport {
  Eigen::VectorXd target, achieved;
  double error_l2 = 0.0, error_h1 = 0.0;
  double target_norm = 0.0;
  double unreachable = 0.0;  // part of the correction outside the move span
  double max_control = 0.0, min_segment = 0.0;
  double burst_duration = 0.0;
  std::vector<std::string> moves;
  std::vector<double> amplitudes;
  std::vector<double> iteration_errors;
  ControlSchedule schedule;

  nlohmann::json to_json(const GalerkinModel& model) const;
};

/// Free flow, then a burst of moves ending at T whose amplitudes are fit to
/// target - S_T(u0) and refined from measured endpoints. NotInSpan when the
/// part of the correction outside the move span exceeds eps * |target|.
SteeringReport steer(const GalerkinModel& model, const Eigen::VectorXd& u0, const Eigen::VectorXd& target, double T,
                     double eps, const std::vector<Eigen::VectorXd>& controls, const SteerSettings& s = {});

}  // namespace pesat
