#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pesat/config.hpp"
#include "pesat/mixing.hpp"
#include "pesat/seeds.hpp"

using namespace pesat;
using namespace testing;

namespace {

GalerkinModel kick_model(int m) {
  GalerkinConfig cfg;
  cfg.trunc = {m, m};
  cfg.dt = 1.0 / 64;
  return GalerkinModel(cfg);
}

MixingConfig kick_config(const GalerkinModel& model) {
  MixingConfig mc;
  mc.noise.Jmax = 6;
  mc.directions = control_directions(model);
  return mc;
}

Eigen::VectorXd random_coords(int dim, double amplitude, std::uint64_t seed) {
  auto rng = rng_for(seed);
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x[i] = uniform(rng, -amplitude, amplitude);
  return x;
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

std::vector<Eigen::VectorXd> cloud(int n, int dim, double shift, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n; ++i) out.push_back(random_coords(dim, 1.0, seed + i) + Eigen::VectorXd::Constant(dim, shift));
  return out;
}

}  // namespace

TEST_CASE("interpolated norm is a norm") {
  const ModeSpace space({2, 2});
  for (double delta : {0.0, 1e-3, 1e-2, 1e-1}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd a = random_coords(space.dim(), 1.0, 300 + trial);
      const Eigen::VectorXd b = random_coords(space.dim(), 1.0, 400 + trial);
      const double na = delta_norm(space, a, delta), nb = delta_norm(space, b, delta);
      CHECK(delta_norm(space, a + b, delta) <= na + nb + 1e-12);
      CHECK(delta_norm(space, -2.5 * a, delta) == doctest::Approx(2.5 * na).epsilon(1e-12));
    }
  }
  const Eigen::VectorXd a = random_coords(space.dim(), 1.0, 500);
  CHECK(delta_norm(space, a, 0.0) == doctest::Approx(a.norm()));
  CHECK(delta_norm(space, a, 1e-1) > delta_norm(space, a, 1e-2));
}

TEST_CASE("zero noise kicks are the free flow") {
  const GalerkinModel model = kick_model(1);
  MixingConfig mc = kick_config(model);
  mc.zero_noise = true;
  const Eigen::VectorXd u = random_coords(model.dim(), 0.5, 61);
  CHECK(kick(model, u, mc, 3) == model.free_flow(u, 1.0));
  mc.zero_noise = false;
  CHECK(kick(model, u, mc, 3) != model.free_flow(u, 1.0));
  CHECK(kick(model, u, mc, 3) == kick(model, u, mc, 3));
}

TEST_CASE("the kick chain rejects forcing and bad settings") {
  GalerkinConfig cfg;
  cfg.trunc = {1, 1};
  cfg.dt = 1.0 / 64;
  cfg.params.h = temperature_state(cast<double>(phi<Rational>(1)));
  const GalerkinModel forced(cfg);
  const MixingConfig mc = kick_config(forced);
  CHECK(error_kind([&] { markov_run(forced, Eigen::VectorXd::Zero(forced.dim()), mc); }) ==
        ErrorKind::PreconditionViolation);
  MixingConfig bad = mc;
  bad.K = 0;
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::ConfigError);
  bad = mc;
  bad.delta_grid = {0.1, -1.0};
  CHECK(error_kind([&] { bad.validate(); }) == ErrorKind::ConfigError);
}

TEST_CASE("test functionals are bounded Lipschitz") {
  const int dim = 12;
  const TestDictionary dict(dim);
  CHECK(dict.size() == 24);
  for (int i = 0; i < dict.size(); ++i) {
    CHECK(dict.sup_bound(i) + dict.lipschitz(i) <= 1.0 + 1e-15);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd a = random_coords(dim, 30.0, 600 + trial);
      const Eigen::VectorXd b = random_coords(dim, 30.0, 700 + trial);
      CHECK(std::abs(dict.eval(i, a)) <= dict.sup_bound(i));
      CHECK(std::abs(dict.eval(i, a) - dict.eval(i, b)) <= dict.lipschitz(i) * (a - b).norm() + 1e-15);
    }
  }
}

TEST_CASE("dual-Lipschitz estimate is a pseudometric") {
  const int dim = 6;
  const TestDictionary dict(dim);
  const auto a = cloud(30, dim, 0.0, 1000), b = cloud(30, dim, 0.5, 2000), c = cloud(30, dim, -0.3, 3000);
  CHECK(dual_lipschitz_estimate(a, a, dict) == 0.0);
  CHECK(dual_lipschitz_estimate(a, b, dict) == dual_lipschitz_estimate(b, a, dict));
  CHECK(dual_lipschitz_estimate(a, c, dict) <= dual_lipschitz_estimate(a, b, dict) + dual_lipschitz_estimate(b, c, dict));
  CHECK(dual_lipschitz_estimate(a, b, dict) > 0.0);
}

TEST_CASE("exponential fit recovers its parameters") {
  std::vector<double> ks, vs;
  for (int k = 0; k < 10; ++k) {
    ks.push_back(k);
    vs.push_back(3.0 * std::exp(-0.7 * k));
  }
  vs[4] = 0.0;  // skipped
  const ExpFit f = fit_exponential(ks, vs);
  CHECK(f.C == doctest::Approx(3.0));
  CHECK(f.c == doctest::Approx(0.7));
  CHECK(f.points == 9);
  CHECK(error_kind([] { fit_exponential({1, 2}, {1.0, 0.0}); }) == ErrorKind::DegenerateFit);
}

TEST_CASE("squeeze ratio grows with the point set") {
  const GalerkinModel model = kick_model(1);
  const auto points = sample_h2_ball(model.space(), 1.0, 20, 7);
  for (const auto& p : points) CHECK(model.space().sobolev_norm(p, 2) <= 1.0 + 1e-12);
  const std::vector<Eigen::VectorXd> half(points.begin(), points.begin() + 10);
  const SqueezeReport small = squeeze_ratios(model, half, {1e-2, 1e-1});
  const SqueezeReport large = squeeze_ratios(model, points, {1e-2, 1e-1});
  for (std::size_t i = 0; i < 2; ++i) CHECK(large.max_ratio[i] >= small.max_ratio[i]);
  CHECK(large.a < 1.0);
  CHECK(large.a == std::min(large.max_ratio[0], large.max_ratio[1]));
  std::vector<Eigen::VectorXd> with_zero = half;
  with_zero.push_back(Eigen::VectorXd::Zero(model.dim()));
  CHECK(squeeze_ratios(model, with_zero, {1e-2, 1e-1}).samples == 10);
}

TEST_CASE("same-noise chains from equal starts cannot be fitted") {
  const GalerkinModel model = kick_model(1);
  MixingConfig mc = kick_config(model);
  mc.K = 6;
  const Eigen::VectorXd u = random_coords(model.dim(), 0.5, 62);
  CHECK(error_kind([&] { coupling_decay(model, u, u, mc); }) == ErrorKind::DegenerateFit);
  const CouplingReport r = coupling_decay(model, u, u + Eigen::VectorXd::Constant(model.dim(), 0.1), mc);
  CHECK(r.distances.size() == 7);
  CHECK(r.slope < 0);
}

TEST_CASE("ensembles do not depend on the thread count") {
  const GalerkinModel model = kick_model(1);
  MixingConfig mc = kick_config(model);
  mc.K = 2;
  mc.ensemble_size = 5;
  const Eigen::VectorXd u0 = random_coords(model.dim(), 0.5, 63);
  const auto one = run_ensemble(model, u0, mc);
  mc.threads = 3;
  const auto three = run_ensemble(model, u0, mc);
  REQUIRE(one.size() == 3);
  for (std::size_t k = 0; k < one.size(); ++k) {
    for (std::size_t i = 0; i < one[k].size(); ++i) CHECK(one[k][i] == three[k][i]);
  }
  const auto chain = markov_run(model, u0, mc, 4);
  CHECK(chain.back() == one.back()[4]);
}

TEST_CASE("long run is stationary in mean energy") {
  const GalerkinModel model = kick_model(2);
  const MixingConfig mc = kick_config(model);
  const AbsorbingReport r = absorbing_probe(model, Eigen::VectorXd::Zero(model.dim()), mc, 10000);
  CHECK(std::abs(r.mean_energy_first - r.mean_energy_second) < 3 * r.standard_error);
  CHECK(r.excursions <= r.kicks / 100);
  CHECK(r.to_json()["kicks"] == 10000);
}
