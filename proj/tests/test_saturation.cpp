#include <doctest.h>

#include "helpers.hpp"
#include "pesat/operators.hpp"
#include "pesat/row_reduce.hpp"
#include "pesat/saturation.hpp"
#include "pesat/seeds.hpp"

using namespace pesat;
using namespace testing;

namespace {

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

TEST_CASE("exact reducer tracks rank and membership") {
  RowReducer r;
  const SparseRow a{{0, 1}, {2, Rational(1, 2)}};
  const SparseRow b{{1, 3}, {2, 1}};
  CHECK(r.insert(a));
  CHECK(r.insert(b));
  CHECK_FALSE(r.insert(axpy(a, Rational(-7, 3), b)));
  CHECK(r.rank() == 2);
  CHECK(r.contains(axpy(b, Rational(5), a)));
  CHECK_FALSE(r.contains(SparseRow{{2, 1}}));
}

TEST_CASE("modular arithmetic is a field") {
  auto rng = rng_for(21);
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t a = std::uniform_int_distribution<std::uint64_t>(1, modp::kPrime - 1)(rng);
    CHECK(modp::mul(a, modp::inverse(a)) == 1);
    CHECK(modp::add(a, modp::neg(a)) == 0);
  }
  const Rational q(3, 7);
  CHECK(modp::mul(modp::from_rational(q), 7) == 3);
}

TEST_CASE("modular reducer agrees with the exact one on random rows") {
  auto rng = rng_for(22);
  for (int trial = 0; trial < 20; ++trial) {
    RowReducer exact;
    ModReducer mod(8);
    for (int n = 0; n < 10; ++n) {
      SparseRow row;
      for (int c = 0; c < 8; ++c) {
        if (uniform_int(rng, 0, 2) == 0) row.emplace_back(c, Rational(uniform_int(rng, -2, 2), uniform_int(rng, 1, 3)));
      }
      row.erase(std::remove_if(row.begin(), row.end(), [](const auto& e) { return e.second == 0; }), row.end());
      if (row.empty()) continue;
      CHECK(exact.insert(row) == mod.insert(modp::from_row(row)));
    }
    CHECK(exact.rank() == mod.rank());
  }
}

TEST_CASE("nonlinear chain from the temperature seeds saturates (2,2)") {
  const ChainReport r = chain(seed_H10(), 12, {2, 2});
  CHECK(r.full_dim == 174);
  CHECK(r.reached_full);
  CHECK(r.stop_j == 4);
  std::vector<int> dims;
  for (const auto& s : r.steps) dims.push_back(s.dim_total);
  CHECK(dims == std::vector<int>{10, 34, 90, 166, 174});
  for (std::size_t i = 1; i < r.steps.size(); ++i) {
    CHECK(r.steps[i].dim_total >= r.steps[i - 1].dim_total);
    CHECK(r.steps[i].dim_theta >= r.steps[i - 1].dim_theta);
  }
  CHECK(r.steps.back().dim_theta == 50);
  CHECK(float_rank(r) == 174);
  CHECK(r.tree.verify());
}

TEST_CASE("derivation tree replays a generator from its children") {
  const ChainReport r = chain(seed_H10(), 2, {2, 2});
  REQUIRE_FALSE(r.generators.empty());
  for (int id : r.generators) CHECK(r.tree.evaluate(id) == r.tree.nodes[id].value);
  const auto j = r.to_json(true);
  CHECK(j.contains("tree"));
}

TEST_CASE("linearized and mixed-seed chains saturate (2,2)") {
  const ChainReport lin = lin_chain(seed_H10(), 12, {2, 2});
  CHECK(lin.reached_full);
  for (std::size_t i = 1; i < lin.steps.size(); ++i) CHECK(lin.steps[i].dim_total >= lin.steps[i - 1].dim_total);
  const ChainReport mixed = chain(seed_Htilde(), 12, {2, 2});
  CHECK(mixed.reached_full);
  CHECK(mixed.steps.front().dim_total == 16);
}

TEST_CASE("a horizontally constant seed never leaves its shell") {
  Subspace s;
  s.basis.push_back(temperature_state(phi<Rational>(5)));
  const ChainReport r = chain(s, 6, {2, 2});
  CHECK_FALSE(r.reached_full);
  for (const auto& step : r.steps) CHECK(step.dim_total == 1);
  const ChainReport lin = lin_chain(s, 6, {2, 2});
  CHECK_FALSE(lin.reached_full);
  CHECK(lin.steps.back().dim_total < 174);
}

TEST_CASE("one bracket step contains its input") {
  Subspace s;
  for (int i : {1, 3, 6}) s.basis.push_back(temperature_state(phi<Rational>(i)));
  // Directions sharing |m| commute; phi1 and phi6 do not.
  CHECK(frak_b2(phi<Rational>(1), phi<Rational>(3)).empty());
  const Subspace out = f2_step(s, {2, 2});
  CHECK(out.basis.size() > s.basis.size());
  for (const auto& b : s.basis) CHECK(span_contains(out, b, {3, 4}));
  CHECK(span_contains(out, temperature_state(frak_b2(phi<Rational>(1), phi<Rational>(6))), {3, 4}));
}

TEST_CASE("span membership is exact") {
  Subspace s;
  s.basis.push_back(temperature_state(phi<Rational>(1)));
  s.basis.push_back(temperature_state(phi<Rational>(2)));
  const RState in = temperature_state(Rational(1, 3) * phi<Rational>(1) - Rational(5) * phi<Rational>(2));
  CHECK(span_contains(s, in, {2, 2}));
  CHECK_FALSE(span_contains(s, temperature_state(phi<Rational>(3)), {2, 2}));
  const RState far = temperature_state(sm<Rational>(5, 0, 1, Phase::S));
  CHECK_FALSE(span_contains(s, far, {2, 2}));
  s.basis.push_back(far);
  CHECK(error_kind([&] { span_contains(s, in, {2, 2}); }) == ErrorKind::ShapeViolation);
}

TEST_CASE("chains reject malformed seeds") {
  Subspace mixed;
  mixed.basis.push_back(RState{psi_field<Rational>(1), phi<Rational>(1)});
  CHECK(error_kind([&] { chain(mixed, 2, {2, 2}); }) == ErrorKind::ShapeViolation);
  Subspace vel;
  vel.basis.push_back(velocity_state(psi_field<Rational>(1)));
  CHECK(error_kind([&] { lin_chain(vel, 2, {2, 2}); }) == ErrorKind::ShapeViolation);
  Subspace even;
  even.basis.push_back(temperature_state(cm<Rational>(1, 0, 1, Phase::C)));
  CHECK(error_kind([&] { chain(even, 2, {2, 2}); }) == ErrorKind::RoleViolation);
  CHECK(error_kind([] { chain(seed_H10(), 0, {2, 2}); }) == ErrorKind::PreconditionViolation);
}
