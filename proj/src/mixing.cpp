#include "pesat/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace pesat {

void MixingConfig::validate() const {
  noise.validate();
  PESAT_DEMAND(K >= 1, ErrorKind::ConfigError, "K must be at least 1");
  PESAT_DEMAND(ensemble_size >= 2, ErrorKind::ConfigError, "ensemble_size must be at least 2");
  PESAT_DEMAND(!directions.empty(), ErrorKind::ConfigError, "noise needs at least one direction");
  PESAT_DEMAND(threads >= 1, ErrorKind::ConfigError, "threads must be at least 1");
  for (double d : delta_grid) PESAT_DEMAND(d > 0, ErrorKind::ConfigError, "delta_grid entries must be positive");
}

void require_unforced(const GalerkinModel& model) {
  PESAT_DEMAND(model.forcing().isZero(0.0), ErrorKind::PreconditionViolation, "the kick chain requires h = 0");
}

Eigen::VectorXd kick(const GalerkinModel& model, const Eigen::VectorXd& u, const MixingConfig& mc,
                     std::uint64_t kick_index, std::uint64_t member) {
  if (mc.zero_noise) return model.free_flow(u, 1.0);
  const NoisePath path = sample_kick(mc.noise, static_cast<int>(mc.directions.size()), kick_index, member);
  return model.flow(u, kick_segments(path, mc.directions, mc.noise.amplitude));
}

std::vector<Eigen::VectorXd> markov_run(const GalerkinModel& model, const Eigen::VectorXd& u0, const MixingConfig& mc,
                                        std::uint64_t member) {
  require_unforced(model);
  mc.validate();
  std::vector<Eigen::VectorXd> out{u0};
  for (int k = 1; k <= mc.K; ++k) out.push_back(kick(model, out.back(), mc, static_cast<std::uint64_t>(k), member));
  return out;
}

double delta_norm(const ModeSpace& space, const Eigen::VectorXd& u, double delta) {
  const double l2 = u.squaredNorm();
  const double h2 = space.sobolev_norm(u, 2);
  return std::sqrt(l2 + delta * h2 * h2);
}

nlohmann::json SqueezeReport::to_json() const {
  return {{"deltas", deltas}, {"max_ratio", max_ratio}, {"best_delta", best_delta}, {"a", a}, {"samples", samples}};
}

std::vector<Eigen::VectorXd> sample_h2_ball(const ModeSpace& space, double radius, int n, std::uint64_t seed) {
  PESAT_DEMAND(radius > 0 && n >= 1, ErrorKind::PreconditionViolation, "need a positive radius and sample count");
  std::seed_seq seq{seed, std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  const Eigen::VectorXd inv = space.sobolev_weight().cwiseInverse();
  std::vector<Eigen::VectorXd> out;
  while (static_cast<int>(out.size()) < n) {
    Eigen::VectorXd u(space.dim());
    for (int i = 0; i < u.size(); ++i) u[i] = normal(rng);
    u = inv.cwiseProduct(u);
    const double r = radius * std::pow(unif(rng), 1.0 / space.dim());
    const double n2 = space.sobolev_norm(u, 2);
    if (n2 == 0 || r == 0) continue;
    out.push_back(u * (r / n2));
  }
  return out;
}

SqueezeReport squeeze_ratios(const GalerkinModel& model, const std::vector<Eigen::VectorXd>& points,
                             const std::vector<double>& delta_grid) {
  require_unforced(model);
  PESAT_DEMAND(!delta_grid.empty(), ErrorKind::PreconditionViolation, "empty delta grid");
  const ModeSpace& space = model.space();
  SqueezeReport r;
  r.deltas = delta_grid;
  r.max_ratio.assign(delta_grid.size(), 0.0);
  for (const auto& u : points) {
    if (u.isZero(0.0)) continue;
    const Eigen::VectorXd su = model.free_flow(u, 1.0);
    for (std::size_t d = 0; d < delta_grid.size(); ++d) {
      r.max_ratio[d] = std::max(r.max_ratio[d], delta_norm(space, su, delta_grid[d]) /
                                                    delta_norm(space, u, delta_grid[d]));
    }
    ++r.samples;
  }
  PESAT_DEMAND(r.samples > 0, ErrorKind::PreconditionViolation, "no nonzero points");
  const auto best = std::min_element(r.max_ratio.begin(), r.max_ratio.end()) - r.max_ratio.begin();
  r.best_delta = delta_grid[static_cast<std::size_t>(best)];
  r.a = r.max_ratio[static_cast<std::size_t>(best)];
  return r;
}

SqueezeReport squeeze_check(const GalerkinModel& model, double ball_radius, int nsamples,
                            const std::vector<double>& delta_grid, std::uint64_t seed) {
  return squeeze_ratios(model, sample_h2_ball(model.space(), ball_radius, nsamples, seed), delta_grid);
}

ExpFit fit_exponential(const std::vector<double>& ks, const std::vector<double>& values, int min_points) {
  PESAT_DEMAND(ks.size() == values.size(), ErrorKind::ShapeViolation, "ks and values differ in length");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (values[i] > 0 && std::isfinite(values[i])) pts.emplace_back(ks[i], std::log(values[i]));
  }
  if (static_cast<int>(pts.size()) < std::max(min_points, 2)) {
    throw Error(ErrorKind::DegenerateFit, "only " + std::to_string(pts.size()) + " positive values to fit");
  }
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
  if (sxx == 0) throw Error(ErrorKind::DegenerateFit, "all points share one abscissa");
  const double slope = sxy / sxx;
  return {std::exp(my - slope * mx), -slope, static_cast<int>(pts.size())};
}

nlohmann::json CouplingReport::to_json() const {
  return {{"distances", distances}, {"slope", slope}, {"fitted_points", fitted_points}};
}

CouplingReport coupling_decay(const GalerkinModel& model, const Eigen::VectorXd& u0, const Eigen::VectorXd& u0b,
                              const MixingConfig& mc, std::uint64_t member) {
  CouplingReport r;
  const auto a = markov_run(model, u0, mc, member);
  const auto b = markov_run(model, u0b, mc, member);
  for (std::size_t k = 0; k < a.size(); ++k) r.distances.push_back((a[k] - b[k]).norm());
  const double floor = 1e-14 * r.distances[0];
  std::vector<double> ks, vs;
  for (std::size_t k = 0; k < r.distances.size() && r.distances[k] > floor; ++k) {
    ks.push_back(static_cast<double>(k));
    vs.push_back(r.distances[k]);
  }
  const ExpFit f = fit_exponential(ks, vs, 5);
  r.slope = -f.c;
  r.fitted_points = f.points;
  return r;
}

TestDictionary::TestDictionary(int dim, std::vector<double> scales) : dim_(dim), scales_(std::move(scales)) {
  PESAT_DEMAND(dim > 0 && !scales_.empty(), ErrorKind::PreconditionViolation, "empty dictionary");
  for (double s : scales_) PESAT_DEMAND(s > 0, ErrorKind::PreconditionViolation, "scales must be positive");
}

double TestDictionary::eval(int index, const Eigen::VectorXd& u) const {
  const double s = scales_[static_cast<std::size_t>(index / dim_)];
  return std::tanh(u[index % dim_] / s) / (1 + 1 / s);
}

double TestDictionary::sup_bound(int index) const {
  const double s = scales_[static_cast<std::size_t>(index / dim_)];
  return 1 / (1 + 1 / s);
}

double TestDictionary::lipschitz(int index) const {
  const double s = scales_[static_cast<std::size_t>(index / dim_)];
  return (1 / s) / (1 + 1 / s);
}

double dual_lipschitz_estimate(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b,
                               const TestDictionary& dict) {
  PESAT_DEMAND(a.size() == b.size() && !a.empty(), ErrorKind::ShapeViolation, "ensembles must have equal nonzero size");
  double best = 0;
  for (int f = 0; f < dict.size(); ++f) {
    double sa = 0, sb = 0;
    for (const auto& x : a) sa += dict.eval(f, x);
    for (const auto& x : b) sb += dict.eval(f, x);
    best = std::max(best, std::abs(sa - sb) / static_cast<double>(a.size()));
  }
  return best;
}

std::vector<std::vector<Eigen::VectorXd>> run_ensemble(const GalerkinModel& model, const Eigen::VectorXd& u0,
                                                       const MixingConfig& mc) {
  require_unforced(model);
  mc.validate();
  const int n = mc.ensemble_size;
  std::vector<std::vector<Eigen::VectorXd>> out(static_cast<std::size_t>(mc.K + 1),
                                                std::vector<Eigen::VectorXd>(static_cast<std::size_t>(n)));
  auto work = [&](int first, int stride) {
    for (int m = first; m < n; m += stride) {
      Eigen::VectorXd u = u0;
      out[0][static_cast<std::size_t>(m)] = u;
      for (int k = 1; k <= mc.K; ++k) {
        u = kick(model, u, mc, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(m));
        out[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)] = u;
      }
    }
  };
  if (mc.threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < mc.threads; ++t) pool.emplace_back(work, t, mc.threads);
    for (auto& th : pool) th.join();
  }
  return out;
}

nlohmann::json EnsembleDecay::to_json() const {
  return {{"distances", distances}, {"C", fit.C}, {"c", fit.c}, {"fitted_points", fit.points}};
}

EnsembleDecay ensemble_decay(const GalerkinModel& model, const Eigen::VectorXd& u0, const Eigen::VectorXd& u0b,
                             const MixingConfig& mc) {
  const auto a = run_ensemble(model, u0, mc);
  const auto b = run_ensemble(model, u0b, mc);
  const TestDictionary dict(model.dim());
  EnsembleDecay r;
  std::vector<double> ks, vs;
  for (int k = 0; k <= mc.K; ++k) {
    const double d = dual_lipschitz_estimate(a[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(k)], dict);
    r.distances.push_back(d);
    if (k >= 1) {
      ks.push_back(k);
      vs.push_back(d);
    }
  }
  r.fit = fit_exponential(ks, vs);
  return r;
}

nlohmann::json AbsorbingReport::to_json() const {
  return {{"kicks", kicks},
          {"burn_in", burn_in},
          {"radius", radius},
          {"max_norm", max_norm},
          {"excursions", excursions},
          {"mean_energy_first", mean_energy_first},
          {"mean_energy_second", mean_energy_second},
          {"standard_error", standard_error}};
}

namespace {

// Mean and batch-means standard error.
std::pair<double, double> batch_mean(const std::vector<double>& x, int batches) {
  const std::size_t len = x.size() / static_cast<std::size_t>(batches);
  PESAT_DEMAND(len >= 1, ErrorKind::PreconditionViolation, "too few kicks for the batch count");
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0;
    for (std::size_t i = 0; i < len; ++i) s += x[static_cast<std::size_t>(b) * len + i];
    means.push_back(s / static_cast<double>(len));
  }
  double m = 0;
  for (double v : means) m += v;
  m /= batches;
  double var = 0;
  for (double v : means) var += (v - m) * (v - m);
  var /= (batches - 1);
  return {m, std::sqrt(var / batches)};
}

}  // namespace

AbsorbingReport absorbing_probe(const GalerkinModel& model, const Eigen::VectorXd& u0, const MixingConfig& mc,
                                int kicks, int batches) {
  require_unforced(model);
  PESAT_DEMAND(kicks >= 4 * batches && batches >= 4, ErrorKind::PreconditionViolation,
               "need at least four kicks per batch and four batches");
  AbsorbingReport r;
  r.kicks = kicks;
  r.burn_in = kicks / 10;
  std::vector<double> norms, energy;
  Eigen::VectorXd u = u0;
  for (int k = 1; k <= kicks; ++k) {
    u = kick(model, u, mc, static_cast<std::uint64_t>(k));
    norms.push_back(model.space().sobolev_norm(u, 2));
    energy.push_back(u.squaredNorm());
  }
  r.max_norm = *std::max_element(norms.begin(), norms.end());
  const std::size_t start = static_cast<std::size_t>(r.burn_in);
  const std::size_t mid = start + (norms.size() - start) / 2;
  r.radius = *std::max_element(norms.begin() + static_cast<std::ptrdiff_t>(start),
                               norms.begin() + static_cast<std::ptrdiff_t>(mid));
  for (std::size_t k = mid; k < norms.size(); ++k) r.excursions += norms[k] > r.radius;

  std::vector<double> e1, e2;
  for (std::size_t k = start; k < mid; ++k) e1.push_back(energy[k]);
  for (std::size_t k = mid; k < norms.size(); ++k) e2.push_back(energy[k]);
  const auto [m1, s1] = batch_mean(e1, batches / 2);
  const auto [m2, s2] = batch_mean(e2, batches / 2);
  r.mean_energy_first = m1;
  r.mean_energy_second = m2;
  r.standard_error = std::hypot(s1, s2);
  return r;
}

}  // namespace pesat
