#pragma once

// Kick chain u_k = S_1(u_{k-1}, eta_k) under Haar noise, the squeeze
// inequality, same-noise coupling and ensemble distances over a fixed
// dictionary of bounded Lipschitz test functionals.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pesat/galerkin.hpp"
#include "pesat/haar_noise.hpp"

namespace pesat {

struct MixingConfig {
  NoiseConfig noise;
  std::vector<Eigen::VectorXd> directions;  // one per noise mode
  int K = 30;
  int ensemble_size = 200;
  std::vector<double> delta_grid{1e-3, 1e-2, 1e-1};
  bool zero_noise = false;
  int threads = 1;

  void validate() const;
};

/// Requires the model forcing to vanish.
void require_unforced(const GalerkinModel& model);

/// One kick: solve over [0, 1] driven by the noise of (member, kick).
Eigen::VectorXd kick(const GalerkinModel& model, const Eigen::VectorXd& u, const MixingConfig& mc,
                     std::uint64_t kick_index, std::uint64_t member = 0);

/// u_0 .. u_K.
std::vector<Eigen::VectorXd> markov_run(const GalerkinModel& model, const Eigen::VectorXd& u0, const MixingConfig& mc,
                                        std::uint64_t member = 0);

/// (|u|^2 + delta |u|_2^2)^1/2 with L2 and H2 norms.
double delta_norm(const ModeSpace& space, const Eigen::VectorXd& u, double delta);

struct SqueezeReport {
  std::vector<double> deltas;
  std::vector<double> max_ratio;  // per delta
  double best_delta = 0.0;
  double a = 0.0;
  int samples = 0;

  nlohmann::json to_json() const;
};

/// Max of |S_1(u)|_delta / |u|_delta over the given nonzero points, zero noise.
SqueezeReport squeeze_ratios(const GalerkinModel& model, const std::vector<Eigen::VectorXd>& points,
                             const std::vector<double>& delta_grid);

/// Uniform samples of the H2 ball.
std::vector<Eigen::VectorXd> sample_h2_ball(const ModeSpace& space, double radius, int n, std::uint64_t seed);

/// squeeze_ratios over samples of the H2 ball.
SqueezeReport squeeze_check(const GalerkinModel& model, double ball_radius, int nsamples,
                            const std::vector<double>& delta_grid, std::uint64_t seed);

struct ExpFit {
  double C = 0.0;
  double c = 0.0;  // value ~ C exp(-c k)
  int points = 0;
};

/// Least squares fit of log values against k; nonpositive values are skipped.
/// DegenerateFit with fewer than `min_points` usable points.
ExpFit fit_exponential(const std::vector<double>& ks, const std::vector<double>& values, int min_points = 2);

struct CouplingReport {
  std::vector<double> distances;  // |u_k - u'_k|, k = 0..K
  double slope = 0.0;             // of log distance against k
  int fitted_points = 0;

  nlohmann::json to_json() const;
};

/// Two chains driven by the same noise. Distances below 1e-14 of the initial
/// one count as underflow; DegenerateFit if fewer than 5 points remain.
CouplingReport coupling_decay(const GalerkinModel& model, const Eigen::VectorXd& u0, const Eigen::VectorXd& u0b,
                              const MixingConfig& mc, std::uint64_t member = 0);

/// f(u) = tanh(<u, e> / s) / (1 + 1/s) over orthonormal basis vectors e and
/// scales s, so that sup |f| + Lip f <= 1.
class TestDictionary {
 public:
  TestDictionary(int dim, std::vector<double> scales = {1.0, 10.0});

  int size() const { return dim_ * static_cast<int>(scales_.size()); }
  double eval(int index, const Eigen::VectorXd& u) const;
  double sup_bound(int index) const;
  double lipschitz(int index) const;

 private:
  int dim_;
  std::vector<double> scales_;
};

/// max over the dictionary of |mean f(A) - mean f(B)|.
double dual_lipschitz_estimate(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b,
                               const TestDictionary& dict);

/// Ensemble states per kick: result[k][member].
std::vector<std::vector<Eigen::VectorXd>> run_ensemble(const GalerkinModel& model, const Eigen::VectorXd& u0,
                                                       const MixingConfig& mc);

struct EnsembleDecay {
  std::vector<double> distances;  // k = 0..K
  ExpFit fit;                     // over k = 1..K

  nlohmann::json to_json() const;
};

/// Distances between ensembles started at u0 and u0b. Member i of both
/// ensembles uses the same noise substream.
EnsembleDecay ensemble_decay(const GalerkinModel& model, const Eigen::VectorXd& u0, const Eigen::VectorXd& u0b,
                             const MixingConfig& mc);

struct AbsorbingReport {
  int kicks = 0;
  int burn_in = 0;
  double radius = 0.0;  // max H2 norm over the first half after burn-in
  double max_norm = 0.0;
  int excursions = 0;   // second-half kicks beyond the radius
  double mean_energy_first = 0.0, mean_energy_second = 0.0;  // of |u_k|^2
  double standard_error = 0.0;  // of the difference, from batch means

  nlohmann::json to_json() const;
};

/// Long run from u0: empirical absorbing radius, excursions, and mean energy
/// over disjoint halves.
AbsorbingReport absorbing_probe(const GalerkinModel& model, const Eigen::VectorXd& u0, const MixingConfig& mc,
                                int kicks, int batches = 20);

}  // namespace pesat
