#include <doctest.h>

#include <numbers>

#include "helpers.hpp"
#include "pesat/field_json.hpp"
#include "pesat/mode_space.hpp"
#include "pesat/seeds.hpp"

using namespace pesat;
using namespace testing;

namespace {

constexpr double kPi = std::numbers::pi;

// Grid average over n^3 points: exact for trigonometric polynomials of degree < n.
template <typename F>
double box_average(F f, int n = 12) {
  double acc = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) acc += f(2 * kPi * i / n, 2 * kPi * j / n, 2 * kPi * k / n);
  return acc / (n * n * n);
}

}  // namespace

TEST_CASE("keys fold onto canonical representatives") {
  TrigKey k{-1, 2, Phase::S, 3, Phase::C};
  CHECK(canonicalize(k) == -1);
  CHECK(k.m1 == 1);
  CHECK(k.m2 == -2);
  CHECK(k.is_canonical());

  TrigKey zero{0, 0, Phase::S, 1, Phase::S};
  CHECK(canonicalize(zero) == 0);

  RScalarField f;
  f.add({-1, 0, Phase::S, 1, Phase::S}, Rational(2));
  CHECK(f.coeff({1, 0, Phase::S, 1, Phase::S}) == Rational(-2));
  f.add({1, 0, Phase::S, 1, Phase::S}, Rational(2));
  CHECK(f.empty());
}

TEST_CASE("product agrees with pointwise multiplication") {
  auto rng = rng_for(1);
  const Truncation t{3, 3};
  for (int trial = 0; trial < 20; ++trial) {
    const RScalarField a = random_theta(rng, t, 3), b = random_theta(rng, t, 3);
    const RScalarField ab = product(a, b);
    for (int s = 0; s < 5; ++s) {
      const double x = uniform(rng, 0, 2 * kPi), y = uniform(rng, 0, 2 * kPi), z = uniform(rng, 0, 2 * kPi);
      CHECK(eval(ab, x, y, z) == doctest::Approx(eval(a, x, y, z) * eval(b, x, y, z)).epsilon(1e-12));
    }
  }
}

TEST_CASE("derivatives agree with central differences") {
  auto rng = rng_for(2);
  const RScalarField f = random_theta(rng, {2, 2}, 5);
  const double h = 1e-5;
  for (int s = 0; s < 10; ++s) {
    const double x = uniform(rng, 0, 6), y = uniform(rng, 0, 6), z = uniform(rng, 0, 6);
    CHECK(eval(d_x(f), x, y, z) == doctest::Approx((eval(f, x + h, y, z) - eval(f, x - h, y, z)) / (2 * h)).epsilon(1e-6));
    CHECK(eval(d_y(f), x, y, z) == doctest::Approx((eval(f, x, y + h, z) - eval(f, x, y - h, z)) / (2 * h)).epsilon(1e-6));
    CHECK(eval(d_z(f), x, y, z) == doctest::Approx((eval(f, x, y, z + h) - eval(f, x, y, z - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("vertical primitive vanishes at z = 0 and differentiates back") {
  auto rng = rng_for(3);
  for (int trial = 0; trial < 10; ++trial) {
    const RScalarField f = random_theta(rng, {2, 3}, 4);
    const RScalarField F = antiderivative_z(f);
    CHECK(d_z(F) == f);
    for (int s = 0; s < 3; ++s) CHECK(eval(F, uniform(rng, 0, 6), uniform(rng, 0, 6), 0.0) == doctest::Approx(0.0));
  }
  RScalarField flat;
  flat.add({1, 0, Phase::C, 0, Phase::C}, Rational(1));
  CHECK_THROWS_AS(antiderivative_z(flat), Error);
  try {
    antiderivative_z(flat);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPeriodicAntiderivative);
  }
}

TEST_CASE("projection onto the velocity space") {
  auto rng = rng_for(4);
  for (int trial = 0; trial < 20; ++trial) {
    RVectorField f;
    for (int i = 0; i < 4; ++i) {
      f.add(random_key(rng, {2, 2}, Phase::C, 0), Rational(uniform_int(rng, -3, 3)), Rational(uniform_int(rng, -3, 3)));
    }
    const RVectorField p = leray_project(f);
    CHECK(in_H1(p));
    CHECK(leray_project(p) == p);
    // the removed part is orthogonal to the kept part
    CHECK(inner_unit(f - p, p) == Rational(0));
  }
  RVectorField odd;
  odd.add({1, 0, Phase::C, 1, Phase::S}, Rational(1), Rational(0));
  try {
    leray_project(odd);
    FAIL("expected a parity violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParityViolation);
  }
}

TEST_CASE("exact inner products match grid averages") {
  auto rng = rng_for(5);
  for (int trial = 0; trial < 5; ++trial) {
    const RScalarField a = random_theta(rng, {2, 2}, 4), b = random_theta(rng, {2, 2}, 4);
    const double avg = box_average([&](double x, double y, double z) { return eval(a, x, y, z) * eval(b, x, y, z); });
    CHECK(to_double(inner_unit(a, b)) == doctest::Approx(avg).epsilon(1e-12));
  }
}

TEST_CASE("json round trip is exact") {
  auto rng = rng_for(6);
  const RState u = random_state(rng, {2, 2}, 5);
  const RState back = state_from_json<Rational>(to_json(u));
  CHECK(back == u);
  RScalarField frac_field;
  frac_field.add({1, 1, Phase::C, 1, Phase::S}, frac(-3, 4));
  CHECK(scalar_field_from_json<Rational>(to_json(frac_field)) == frac_field);
}

TEST_CASE("mode space dimensions and orthonormal coordinates") {
  // Frozen from an independent count of canonical keys per slot.
  CHECK(ModeSpace({2, 2}).dim() == 174);
  CHECK(ModeSpace({2, 2}).dim_theta() == 50);
  CHECK(ModeSpace({3, 3}).dim() == 489);

  const ModeSpace space({2, 2});
  auto rng = rng_for(7);
  for (int trial = 0; trial < 10; ++trial) {
    const DState a = cast<double>(random_state(rng, {2, 2}, 5));
    const DState b = cast<double>(random_state(rng, {2, 2}, 5));
    const Eigen::VectorXd xa = space.orthonormal(a), xb = space.orthonormal(b);
    CHECK(xa.dot(xb) == doctest::Approx(inner(a, b)).epsilon(1e-12));
    CHECK((space.orthonormal(space.field(xa)) - xa).norm() <= 1e-12 * (1 + xa.norm()));
    CHECK(space.sobolev_norm(xa, 1) == doctest::Approx(sobolev_norm(a, 1)).epsilon(1e-12));
  }
}

TEST_CASE("unit mass of basis elements") {
  CHECK(unit_mass<Rational>({0, 0, Phase::C, 0, Phase::C}) == Rational(1));
  CHECK(unit_mass<Rational>({1, 0, Phase::C, 0, Phase::C}) == frac(1, 2));
  CHECK(unit_mass<Rational>({1, 0, Phase::C, 1, Phase::S}) == frac(1, 4));
  const double avg = box_average([](double x, double, double z) { return std::pow(std::cos(x) * std::sin(z), 2); });
  CHECK(avg == doctest::Approx(0.25));
}
