#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pesat/haar_noise.hpp"

using namespace pesat;

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

// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

}  // namespace

TEST_CASE("Haar atoms") {
  CHECK(haar(1, 0, 0.25) == 1);
  CHECK(haar(1, 0, 0.75) == -1);
  CHECK(haar(2, 1, 0.1) == 0);
  CHECK(haar(2, 1, 0.6) == 1);
  CHECK(haar(2, 1, 0.8) == -1);
  CHECK(haar(0, 0, 0.999) == 1);
  CHECK(haar(0, 0, 1.0) == 0);
  CHECK(error_kind([] { haar(2, 2, 0.1); }) == ErrorKind::IndexOutOfRange);
  CHECK(error_kind([] { haar(0, 1, 0.1); }) == ErrorKind::IndexOutOfRange);
  // Midpoint sums over a fine grid integrate the atoms exactly.
  for (int j = 1; j <= 5; ++j) {
    for (int l = 0; l < (1 << (j - 1)); ++l) {
      int acc = 0;
      for (int c = 0; c < 64; ++c) acc += haar(j, l, (c + 0.5) / 64);
      CHECK(acc == 0);
    }
  }
}

TEST_CASE("level zero gives a constant path in [-1, 1]") {
  NoiseConfig cfg;
  cfg.Jmax = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const NoisePath p = sample_kick(cfg, 3, k);
    CHECK(p.values.rows() == 1);
    CHECK(p.values.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(p.at(1, 0.1) == p.at(1, 0.9));
  }
}

TEST_CASE("paths respect the sup bound") {
  NoiseConfig cfg;
  cfg.q = 1.5;
  cfg.Jmax = 10;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const NoisePath p = sample_kick(cfg, 10, k);
    CHECK(p.values.cwiseAbs().maxCoeff() <= p.sup_bound(cfg.q));
  }
  NoisePath p;
  p.Jmax = 2;
  CHECK(p.sup_bound(2.0) == doctest::Approx(2.25));
}

TEST_CASE("paths are reproducible per (seed, member, kick)") {
  NoiseConfig cfg;
  cfg.seed = 99;
  const NoisePath a = sample_kick(cfg, 10, 7, 3);
  sample_kick(cfg, 10, 8, 3);
  const NoisePath b = sample_kick(cfg, 10, 7, 3);
  CHECK(a.values == b.values);
  CHECK(a.values != sample_kick(cfg, 10, 7, 4).values);
  CHECK(a.values != sample_kick(cfg, 10, 6, 3).values);
  cfg.seed = 100;
  CHECK(a.values != sample_kick(cfg, 10, 7, 3).values);
}

TEST_CASE("path value at a fixed time has mean zero") {
  NoiseConfig cfg;
  const int n = 100000;
  double sum = 0, sum2 = 0;
  for (int k = 0; k < n; ++k) {
    const double v = sample_kick(cfg, 1, k).at(0, 0.3);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::abs(mean) < 3 * sd / std::sqrt(n));
}

TEST_CASE("coefficient samples pass a Kolmogorov-Smirnov test") {
  const int n = 100000;
  const double critical = 1.628 / std::sqrt(n);  // 1% level
  NoiseConfig tri;
  NoiseStream rng(5, 0, 0);
  std::vector<double> xs(n);
  for (auto& x : xs) x = sample_density(tri, rng);
  CHECK(ks_statistic(xs, [&](double x) { return density_cdf(tri, x); }) < critical);

  NoiseConfig table;
  table.density = Density::Table;
  table.table = {0.0, 1.0, 2.0, 1.0, 0.5};
  table.validate();
  NoiseStream rng2(6, 0, 0);
  for (auto& x : xs) x = sample_density(table, rng2);
  CHECK(ks_statistic(xs, [&](double x) { return density_cdf(table, x); }) < critical);
  CHECK(density_cdf(table, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("density tables are validated") {
  NoiseConfig cfg;
  cfg.density = Density::Table;
  cfg.table = {1.0, 1.0};
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::ConfigError);
  cfg.table = {1.0, 0.0, 1.0};
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::ConfigError);
  cfg.table = {1.0, -1.0, 1.0, 2.0, 1.0};
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::ConfigError);
  NoiseConfig q;
  q.q = 1.0;
  CHECK(error_kind([&] { q.validate(); }) == ErrorKind::ConfigError);
}

TEST_CASE("decomposability report") {
  NoiseConfig cfg;
  cfg.q = 2;
  cfg.Jmax = 8;
  const auto r = decomposability_report(cfg, std::vector<double>(10, 1.0));
  CHECK(r.tail_bound <= 0.125);
  CHECK(r.tail_bound == doctest::Approx(0.125));
  CHECK(r.levels.size() == 9);
  for (const auto& l : r.levels) CHECK(l.coefficient > 0);
  CHECK(r.levels.back().partial_weight_sum == doctest::Approx(NoisePath{8, {}}.sup_bound(2.0)));
  CHECK_FALSE(r.coefficients_summable);
  CHECK(r.to_json()["levels"].size() == 9);
}

TEST_CASE("kick segments follow the dyadic cells") {
  NoiseConfig cfg;
  cfg.Jmax = 3;
  const NoisePath p = sample_kick(cfg, 2, 0);
  std::vector<Eigen::VectorXd> dirs{Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 0, 2)};
  const auto segs = kick_segments(p, dirs, 0.5);
  REQUIRE(segs.size() == 8);
  for (int c = 0; c < 8; ++c) {
    CHECK(segs[c].duration == 0.125);
    CHECK(segs[c].eta[0] == doctest::Approx(0.5 * p.values(c, 0)));
    CHECK(segs[c].eta[2] == doctest::Approx(p.values(c, 1)));
  }
  dirs.pop_back();
  CHECK(error_kind([&] { kick_segments(p, dirs, 1.0); }) == ErrorKind::ShapeViolation);
  const std::string csv = noise_path_csv(p);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 9);
}
