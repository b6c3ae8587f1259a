#pragma once

// Truncated Galerkin model in orthonormal mode coordinates and its
// time steppers. Controls are piecewise constant in time.

#include <vector>

#include <Eigen/Dense>

#include "pesat/mode_space.hpp"
#include "pesat/operators.hpp"

namespace pesat {

enum class Scheme { SemiImplicitEuler, ImexRk2 };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct GalerkinConfig {
  Truncation trunc;
  PhysicalParams<double> params;
  double dt = 1e-3;
  Scheme scheme = Scheme::ImexRk2;
  double blowup = 1e6;
};

/// Control held constant over `duration`: u' = -L(u+zeta) - B(u+zeta) - Q(u+zeta) + h + eta.
/// Empty vectors stand for zero.
struct Segment {
  double duration = 0.0;
  Eigen::VectorXd zeta;
  Eigen::VectorXd eta;
  int min_steps = 1;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<int> segment;  // per interval, index of the active segment
};

class GalerkinModel {
 public:
  explicit GalerkinModel(const GalerkinConfig& cfg);

  const GalerkinConfig& config() const { return cfg_; }
  const ModeSpace& space() const { return space_; }
  int dim() const { return space_.dim(); }

  Eigen::VectorXd coords(const DState& u) const { return space_.orthonormal(u); }
  DState field(const Eigen::VectorXd& x) const { return space_.field(x); }

  const Eigen::VectorXd& l_diag() const { return l_diag_; }
  const Eigen::MatrixXd& q_matrix() const { return q_; }
  const Eigen::VectorXd& forcing() const { return h_; }

  /// Projected B(x).
  Eigen::VectorXd B(const Eigen::VectorXd& x) const;
  /// Projected b(x, y), with b(x, x) = 2 B(x).
  Eigen::VectorXd b(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  /// Matrix of w -> b(x, w).
  Eigen::MatrixXd b_matrix(const Eigen::VectorXd& x) const;

  /// -L(u+zeta) - B(u+zeta) - Q(u+zeta) + h + eta, projected.
  Eigen::VectorXd rhs(const Eigen::VectorXd& u, const Eigen::VectorXd& zeta, const Eigen::VectorXd& eta) const;

  /// One step of size h with constant controls.
  Eigen::VectorXd step(const Eigen::VectorXd& u, const Eigen::VectorXd& zeta, const Eigen::VectorXd& eta,
                       double h) const;

  /// Integrates through the segments. Only the final state is kept unless `keep_all`.
  Trajectory solve(const Eigen::VectorXd& u0, const std::vector<Segment>& segments, bool keep_all = true) const;
  Eigen::VectorXd flow(const Eigen::VectorXd& u0, const std::vector<Segment>& segments) const;
  Eigen::VectorXd free_flow(const Eigen::VectorXd& u0, double duration) const;

  int steps_for(const Segment& s) const;

 private:
  // Everything but -L u, with the controls already folded in.
  Eigen::VectorXd explicit_part(const Eigen::VectorXd& u, const Eigen::VectorXd& zeta,
                                const Eigen::VectorXd& eta) const;

  GalerkinConfig cfg_;
  ModeSpace space_;
  Eigen::VectorXd l_diag_;
  Eigen::MatrixXd q_;
  Eigen::VectorXd h_;
  // Quadratic tensor: for pair p, b(e_i, e_j) (i < j) or B(e_i) (i == j).
  std::vector<int> pair_i_, pair_j_, pair_begin_;
  std::vector<int> out_index_;
  std::vector<double> out_value_;
};

/// Residual of the energy balance per step interval; zeta must vanish.
std::vector<double> energy_report(const Trajectory& traj, const GalerkinModel& model,
                                  const std::vector<Segment>& segments);

/// max |L u|^2 over the trajectory: the size of the second time derivative of
/// the energy, which sets the scale of a first-order residual.
double energy_scale(const Trajectory& traj, const GalerkinModel& model);

}  // namespace pesat
