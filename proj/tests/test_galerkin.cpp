#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "pesat/galerkin.hpp"
#include "pesat/seeds.hpp"

using namespace pesat;
using namespace testing;

namespace {

GalerkinConfig config(Scheme scheme, double dt) {
  GalerkinConfig cfg;
  cfg.trunc = {2, 2};
  cfg.dt = dt;
  cfg.scheme = scheme;
  return cfg;
}

Eigen::VectorXd random_coords(int dim, double amplitude, std::uint64_t seed) {
  auto rng = rng_for(seed);
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x[i] = uniform(rng, -amplitude, amplitude);
  return x;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_residual(Scheme scheme, double dt, const Eigen::VectorXd& u0, double T) {
  const GalerkinModel model(config(scheme, dt));
  const std::vector<Segment> segs{{T, {}, {}, 1}};
  const Trajectory traj = model.solve(u0, segs);
  return max_abs(energy_report(traj, model, segs));
}

template <typename Fn>
ErrorKind error_kind(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::ConfigError;
}

}  // namespace

TEST_CASE("scheme names round-trip") {
  for (Scheme s : {Scheme::SemiImplicitEuler, Scheme::ImexRk2}) CHECK(scheme_from_string(to_string(s)) == s);
  CHECK(error_kind([] { scheme_from_string("rk4"); }) == ErrorKind::ConfigError);
}

TEST_CASE("zero is an exact equilibrium without forcing") {
  for (Scheme s : {Scheme::SemiImplicitEuler, Scheme::ImexRk2}) {
    const GalerkinModel model(config(s, 1e-2));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.dim());
    CHECK(model.rhs(zero, {}, {}).isZero(0.0));
    const Trajectory traj = model.solve(zero, {{1.0, {}, {}, 1}});
    for (const auto& u : traj.states) CHECK(u.isZero(0.0));
    const auto res = energy_report(traj, model, {{1.0, {}, {}, 1}});
    CHECK(max_abs(res) == 0.0);
  }
}

TEST_CASE("projected nonlinearity is skew and matches the exact operator") {
  const GalerkinModel model(config(Scheme::ImexRk2, 1e-3));
  auto rng = rng_for(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd x = random_coords(model.dim(), 1.0, 100 + trial);
    CHECK(std::abs(model.B(x).dot(x)) < 1e-12 * x.squaredNorm() * x.norm());
    CHECK((model.b(x, x) - 2 * model.B(x)).norm() < 1e-12 * x.squaredNorm());
    const Eigen::VectorXd y = random_coords(model.dim(), 1.0, 200 + trial);
    CHECK((model.b_matrix(x) * y - model.b(x, y)).norm() < 1e-11 * x.norm() * y.norm());
  }
  for (int trial = 0; trial < 5; ++trial) {
    const RState u = random_state(rng, {2, 2}, 3);
    const Eigen::VectorXd x = model.coords(cast<double>(u));
    const Eigen::VectorXd exact = model.coords(cast<double>(project_trunc(op_B(u), {2, 2})));
    CHECK((model.B(x) - exact).norm() < 1e-11 * (1 + exact.norm()));
  }
}

TEST_CASE("diagonal dissipation on a single temperature mode") {
  GalerkinConfig cfg = config(Scheme::ImexRk2, 1e-3);
  cfg.params.f = 0;
  const GalerkinModel model(cfg);
  const Eigen::VectorXd x = model.coords(temperature_state(phi<double>(1)));
  const Eigen::VectorXd r = model.rhs(x, {}, {});
  const Eigen::VectorXd theta_part = r.head(model.space().dim_theta());
  CHECK((theta_part + 2 * x.head(model.space().dim_theta())).norm() < 1e-13);
}

TEST_CASE("free decay is monotone in the L2 norm") {
  for (Scheme s : {Scheme::SemiImplicitEuler, Scheme::ImexRk2}) {
    const GalerkinModel model(config(s, 1e-3));
    const Eigen::VectorXd u0 = random_coords(model.dim(), 0.3, 32);
    const Trajectory traj = model.solve(u0, {{1.0, {}, {}, 1}});
    for (std::size_t n = 1; n < traj.states.size(); ++n) CHECK(traj.states[n].norm() < traj.states[n - 1].norm());
  }
}

TEST_CASE("energy residual is first order for Euler and second order for the two-stage scheme") {
  const GalerkinModel probe(config(Scheme::ImexRk2, 1e-3));
  const Eigen::VectorXd u0 = random_coords(probe.dim(), 0.3, 33);
  const double e1 = max_residual(Scheme::SemiImplicitEuler, 2e-3, u0, 0.25);
  const double e2 = max_residual(Scheme::SemiImplicitEuler, 1e-3, u0, 0.25);
  CHECK(e1 / e2 >= 1.7);
  CHECK(e1 / e2 <= 2.3);
  // The ratio approaches 4 from below as dt shrinks.
  const double r1 = max_residual(Scheme::ImexRk2, 1e-3, u0, 0.25);
  const double r2 = max_residual(Scheme::ImexRk2, 5e-4, u0, 0.25);
  CHECK(r1 / r2 >= 3.9);
  CHECK(r1 / r2 <= 8.0);
}

TEST_CASE("free-decay residual stays within the first-order bound") {
  const double dt = 1e-3;
  const GalerkinModel model(config(Scheme::SemiImplicitEuler, dt));
  const Eigen::VectorXd u0 = random_coords(model.dim(), 0.3, 34);
  const std::vector<Segment> segs{{0.5, {}, {}, 1}};
  const Trajectory traj = model.solve(u0, segs);
  CHECK(max_abs(energy_report(traj, model, segs)) <= 5 * dt * energy_scale(traj, model));
}

TEST_CASE("one two-stage step is third-order consistent") {
  const Eigen::VectorXd u0 = random_coords(GalerkinModel(config(Scheme::ImexRk2, 1e-3)).dim(), 0.3, 35);
  auto defect = [&](double h) {
    const GalerkinModel model(config(Scheme::ImexRk2, h));
    const Eigen::VectorXd one = model.step(u0, {}, {}, h);
    const Eigen::VectorXd two = model.step(model.step(u0, {}, {}, h / 2), {}, {}, h / 2);
    return (one - two).norm();
  };
  const double ratio = defect(2e-3) / defect(1e-3);
  CHECK(ratio > 6.0);
  CHECK(ratio < 10.0);
}

TEST_CASE("solution depends Lipschitz-continuously on the data") {
  const Eigen::VectorXd u0 = random_coords(GalerkinModel(config(Scheme::ImexRk2, 1e-3)).dim(), 0.3, 36);
  Eigen::VectorXd d = random_coords(u0.size(), 1.0, 37);
  d *= 1e-4 / d.norm();
  double prev = 0;
  for (double dt : {2e-3, 1e-3}) {
    const GalerkinModel model(config(Scheme::ImexRk2, dt));
    const double c = (model.free_flow(u0 + d, 1.0) - model.free_flow(u0, 1.0)).norm() / d.norm();
    CHECK(c < 2.0);
    if (prev > 0) CHECK(c == doctest::Approx(prev).epsilon(0.01));
    prev = c;
  }
}

TEST_CASE("blowup guard raises StepUnstable") {
  GalerkinConfig cfg = config(Scheme::ImexRk2, 1e-2);
  cfg.blowup = 10;
  const GalerkinModel model(cfg);
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(model.dim());
  u0[0] = 20;
  CHECK(error_kind([&] { model.free_flow(u0, 0.1); }) == ErrorKind::StepUnstable);
}

TEST_CASE("segments respect their minimum step counts and controls") {
  const GalerkinModel model(config(Scheme::ImexRk2, 1e-2));
  Segment s{1e-3, {}, Eigen::VectorXd::Zero(model.dim()), 7};
  CHECK(model.steps_for(s) == 7);
  s.eta[0] = 1.0;
  const Trajectory traj = model.solve(Eigen::VectorXd::Zero(model.dim()), {s});
  CHECK(traj.states.size() == 8);
  CHECK(traj.states.back()[0] > 0);
  CHECK(traj.times.back() == doctest::Approx(1e-3));
}
