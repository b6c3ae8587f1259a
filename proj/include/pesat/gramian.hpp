#pragma once

// Linearization around a reference trajectory, its adjoint, and the
// controllability Gramian over a finite control space.

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pesat/galerkin.hpp"
#include "pesat/haar_noise.hpp"

namespace pesat {

struct LinearizedSystem {
  const GalerkinModel* model = nullptr;
  Trajectory reference;       // on the model's step grid
  Eigen::MatrixXd controls;   // orthonormal columns spanning the control space

  double dt() const { return model->config().dt; }
  int steps() const { return static_cast<int>(reference.states.size()) - 1; }
  /// Piecewise-linear interpolation of the reference.
  Eigen::VectorXd reference_at(double t) const;
  int index_of(double t) const;  // grid index of a time on the grid
};

/// Orthonormalizes the control directions (columns need not be independent).
LinearizedSystem make_linearized(const GalerkinModel& model, Trajectory reference,
                                 const std::vector<Eigen::VectorXd>& directions);

/// -L w - b(ref, w) - Q w.
Eigen::VectorXd lin_rhs(const GalerkinModel& model, const Eigen::VectorXd& ref, const Eigen::VectorXd& w);

using ControlPath = std::function<Eigen::VectorXd(double)>;

/// Forward linearized solve on [t0, t1]; g is sampled at step starts.
Eigen::VectorXd lin_solve(const LinearizedSystem& sys, const Eigen::VectorXd& w0, const ControlPath& g, double t0,
                          double t1);

/// Backward solve of the adjoint with the transposed step matrices.
Eigen::VectorXd adjoint_solve(const LinearizedSystem& sys, const Eigen::VectorXd& wT, double t1, double t0);

/// Step matrix of the linearized scheme from grid index n to n + 1.
Eigen::MatrixXd step_matrix(const LinearizedSystem& sys, int n);

struct GramianResult {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd eigenvalues;  // ascending
  double rel_tolerance = 1e-10;
  int rank = 0;
  double min_over_max = 0.0;

  nlohmann::json to_json(bool with_matrix = false) const;
};

GramianResult analyze(Eigen::MatrixXd g, double rel_tolerance = 1e-10);

/// Trapezoid quadrature over ngrid nodes of [0, tau]; columns R(tau, t) E by
/// forward solves from each node.
GramianResult gramian(const LinearizedSystem& sys, double tau, int ngrid);

/// Same quadrature from adjoint solves: <G w, w> = int |P p(t)|^2.
GramianResult gramian_adjoint(const LinearizedSystem& sys, double tau, int ngrid);

/// Number of basis elements in the (m, p) shells touched by the control space;
/// bounds the rank of the Gramian around the rest state.
int shell_closure_dim(const ModeSpace& space, const Eigen::MatrixXd& controls);

struct DoublingCheck {
  double max_rel_change = 0.0;  // over eigenvalues above rel_tolerance * max
  int compared = 0;
};

/// Eigenvalue change when the quadrature grid goes from ngrid to 2 ngrid - 1 nodes.
DoublingCheck quadrature_doubling(const LinearizedSystem& sys, double tau, int ngrid, double rel_tolerance = 1e-10,
                                  bool adjoint = true);

struct KernelCertificate {
  struct Trial {
    std::uint64_t kick;
    double min_over_max;
    int rank;
    bool positive;
    double doubling_change;  // NaN when not checked
  };
  std::vector<Trial> trials;
  double fraction = 0.0;
  double min_floor = 0.0;

  nlohmann::json to_json() const;
};

/// Gramians around references S(u0, eta_k) driven by sampled kicks along the
/// control directions.
KernelCertificate kernel_certificate(const GalerkinModel& model, const Eigen::VectorXd& u0,
                                     const std::vector<Eigen::VectorXd>& directions, const NoiseConfig& noise,
                                     double tau, int ngrid, int trials, double rel_tolerance = 1e-10,
                                     bool adjoint = true, bool check_doubling = false);

}  // namespace pesat
