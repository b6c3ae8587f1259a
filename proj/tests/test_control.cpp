#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pesat/config.hpp"
#include "pesat/control.hpp"
#include "pesat/seeds.hpp"

using namespace pesat;
using namespace testing;

namespace {

GalerkinModel model_22() {
  GalerkinConfig cfg;
  cfg.trunc = {2, 2};
  cfg.dt = std::ldexp(1.0, -10);
  return GalerkinModel(cfg);
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

double h1(const GalerkinModel& m, const Eigen::VectorXd& x) { return m.space().sobolev_norm(x, 1); }

}  // namespace

TEST_CASE("truncated F map matches the exact one") {
  const GalerkinModel model = model_22();
  PhysicalParams<Rational> prm;
  auto rng = rng_for(51);
  for (int trial = 0; trial < 5; ++trial) {
    const RState u = random_state(rng, {2, 2}, 3);
    const RScalarField xi = random_theta(rng, {2, 2}, 2);
    const Eigen::VectorXd exact = model.coords(cast<double>(project_trunc(f_map(u, xi, prm), {2, 2})));
    const Eigen::VectorXd numeric =
        f_map(model, model.coords(cast<double>(u)), model.coords(cast<double>(temperature_state(xi))));
    CHECK((numeric - exact).norm() < 1e-11 * (1 + exact.norm()));
  }
}

TEST_CASE("four F maps compose to the temperature bracket") {
  PhysicalParams<Rational> prm;
  auto rng = rng_for(52);
  for (int trial = 0; trial < 5; ++trial) {
    const RState u = random_state(rng, {2, 2}, 3);
    const RScalarField a = random_theta(rng, {2, 2}, 2);
    const RScalarField b = random_theta(rng, {2, 2}, 2);
    const RState out = f_map(f_map(f_map(f_map(u, a, prm), b, prm), Rational(-1) * a, prm), Rational(-1) * b, prm);
    RState expect = u;
    expect.theta += frak_b2(a, b);
    CHECK(out == expect);
  }
}

TEST_CASE("order fit and probe tables") {
  std::vector<ProbeRow> rows{{1e-1, 3e-1}, {1e-2, 3e-3}, {1e-3, 3e-5}};
  CHECK(fit_order(rows) == doctest::Approx(2.0));
  CHECK(error_kind([] { fit_order({{1e-1, 0.0}, {1e-2, 1.0}}); }) == ErrorKind::DegenerateFit);
  CHECK(error_kind([] { fit_order({{1e-1, 1.0}, {1e-1, 2.0}}); }) == ErrorKind::DegenerateFit);
}

TEST_CASE("fast temperature controls approach the F map") {
  const GalerkinModel model = model_22();
  const Eigen::VectorXd u0 = model.coords(DState{0.1 * psi_field<double>(1), 0.1 * phi<double>(2)});
  const Eigen::VectorXd xi = model.coords(temperature_state(phi<double>(6)));
  const ProbeTable t = limit_probe_xi(model, u0, xi, {1e-1, 1e-2, 1e-3});
  CHECK(t.monotone);
  CHECK(t.alpha >= 0.9);
  CHECK(t.rows.front().delta == 1e-1);
  CHECK(error_kind([&] { limit_probe_xi(model, u0, u0, {1e-1, 1e-2}); }) == ErrorKind::PreconditionViolation);
}

TEST_CASE("fast velocity controls approach the advection limit") {
  const GalerkinModel model = model_22();
  const Eigen::VectorXd u0 = model.coords(temperature_state(0.1 * phi<double>(1)));
  const Eigen::VectorXd eta = model.coords(temperature_state(phi<double>(3)));
  const Eigen::VectorXd zeta = model.coords(velocity_state(psi_field<double>(2)));
  const ProbeTable t = limit_probe_zeta(model, u0, zeta, eta, {1e-2, 1e-3, 1e-4});
  CHECK(t.monotone);
  // The error of the square-root-scaled shift is O(delta^1/2).
  CHECK(t.alpha == doctest::Approx(0.5).epsilon(0.05));
  CHECK(error_kind([&] { limit_probe_zeta(model, u0, u0, eta, {1e-1, 1e-2}); }) == ErrorKind::PreconditionViolation);
}

TEST_CASE("impulses shift the state to first order in their duration") {
  const GalerkinModel model = model_22();
  const Eigen::VectorXd u0 = model.coords(DState{0.1 * psi_field<double>(1), 0.1 * phi<double>(2)});
  const Eigen::VectorXd e = model.coords(temperature_state(phi<double>(4)));
  auto err = [&](double eps) { return (apply(model, u0, impulse(e, 0.3, eps)) - (u0 + 0.3 * e)).norm(); };
  const double ratio = err(2e-3) / err(1e-3);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.1));
  CHECK(error_kind([&] { impulse(e, 1.0, 0.0); }) == ErrorKind::PreconditionViolation);
}

TEST_CASE("realized F move stays close to the exact map") {
  const GalerkinModel model = model_22();
  const Eigen::VectorXd u0 = model.coords(DState{0.1 * psi_field<double>(1), 0.1 * phi<double>(2)});
  const Eigen::VectorXd xi = model.coords(temperature_state(0.2 * phi<double>(5)));
  const double size = h1(model, f_map(model, u0, xi) - u0);
  const MeasuredMove m = measured_f_move(model, u0, xi, {}, 0.05 * size);
  CHECK(m.error <= 0.05 * size);
  CHECK(m.schedule.entries.size() == 3);
  CHECK(error_kind([&] { measured_f_move(model, u0, xi, {}, 1e-12, 1); }) == ErrorKind::BudgetExceeded);
}

TEST_CASE("exact shifts realize the bracket move") {
  const GalerkinModel model = model_22();
  const Eigen::VectorXd u0 = model.coords(DState{0.1 * psi_field<double>(1), 0.1 * phi<double>(2)});
  const Eigen::VectorXd a = model.coords(temperature_state(0.3 * phi<double>(1)));
  const Eigen::VectorXd b = model.coords(temperature_state(0.3 * phi<double>(6)));
  const Eigen::VectorXd expect = f_map(model, f_map(model, f_map(model, f_map(model, u0, a), b), -a), -b);
  MoveSettings coarse, fine;
  coarse.exact_shifts = fine.exact_shifts = true;
  coarse.delta = 1e-3;
  fine.delta = 1e-4;
  const double e1 = h1(model, apply(model, u0, bracket_move(a, b, coarse)) - expect);
  const double e2 = h1(model, apply(model, u0, bracket_move(a, b, fine)) - expect);
  CHECK(e1 / e2 == doctest::Approx(10.0).epsilon(0.05));
  CHECK(e2 < 0.05 * h1(model, expect - u0));
}

TEST_CASE("schedules report their extent") {
  const GalerkinModel model = model_22();
  const Eigen::VectorXd e = Eigen::VectorXd::Unit(model.dim(), 0);
  ControlSchedule s = impulse(e, 2.0, 0.5);
  s.append(impulse(e, 1.0, 0.25));
  CHECK(s.total_time() == 0.75);
  CHECK(s.max_magnitude() == doctest::Approx(4.0));
  CHECK(s.min_duration() == 0.25);
  CHECK(s.to_json(model)["segments"].size() == 2);
  CHECK(f_move(Eigen::VectorXd::Zero(model.dim()), {}).entries.empty());
}

TEST_CASE("steering to the free-flow endpoint needs no moves") {
  const GalerkinModel model = model_22();
  const auto controls = control_directions(model);
  const Eigen::VectorXd u0 = model.coords(temperature_state(0.1 * phi<double>(1)));
  const Eigen::VectorXd target = model.free_flow(u0, 1.0);
  const SteeringReport r = steer(model, u0, target, 1.0, 0.1, controls);
  CHECK(r.moves.empty());
  CHECK(r.error_l2 < 1e-12);
}

TEST_CASE("steering reaches a bracket-generated target and replays") {
  const GalerkinModel model = model_22();
  const auto controls = control_directions(model);
  const Eigen::VectorXd u0 = model.coords(temperature_state(0.1 * phi<double>(1)));
  const Eigen::VectorXd target = model.coords(temperature_state(cast<double>(parse_state("0.1*theta_s_1_0_2").theta)));
  const SteeringReport r = steer(model, u0, target, 1.0, 0.1, controls);
  CHECK(r.error_l2 < 0.1 * r.target_norm);
  CHECK(r.schedule.total_time() == doctest::Approx(1.0));
  const Eigen::VectorXd again = apply(model, u0, r.schedule);
  CHECK(again == r.achieved);
  CHECK(r.to_json(model).contains("schedule_stats"));
}

TEST_CASE("steering rejects targets outside the move span") {
  const GalerkinModel model = model_22();
  const std::vector<Eigen::VectorXd> controls{model.coords(temperature_state(phi<double>(1)))};
  const Eigen::VectorXd target = model.coords(temperature_state(cast<double>(parse_state("0.1*theta_s_2_0_2").theta)));
  CHECK(error_kind([&] { steer(model, Eigen::VectorXd::Zero(model.dim()), target, 1.0, 0.1, controls); }) ==
        ErrorKind::NotInSpan);
  CHECK(error_kind([&] { steer(model, target, target, 0.0, 0.1, controls); }) == ErrorKind::PreconditionViolation);
}
