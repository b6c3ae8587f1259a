#pragma once

// Bounded Haar-series noise: one kick per unit time interval, built from
// unnormalized Haar atoms with level weights j^-q and i.i.d. coefficients.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pesat/galerkin.hpp"

namespace pesat {

enum class Density { Triangular, Table };

struct NoiseConfig {
  double q = 2.0;
  int Jmax = 8;
  Density density = Density::Triangular;
  // Density values at equispaced nodes on [-1, 1] (piecewise linear); Table only.
  std::vector<double> table;
  std::uint64_t seed = 0;
  double amplitude = 1.0;  // multiplies every control direction

  void validate() const;
};

/// +1 / -1 on the two halves of [l 2^(1-j), (l+1) 2^(1-j)); j = 0 is the
/// indicator of [0, 1).
int haar(int j, int l, double t);

/// Deterministic stream for a (seed, member, kick) triple.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t member, std::uint64_t kick);
  double uniform();  // in [0, 1), top 53 bits of the engine output

 private:
  std::mt19937_64 engine_;
};

double sample_density(const NoiseConfig& cfg, NoiseStream& rng);
double density_pdf(const NoiseConfig& cfg, double x);
double density_cdf(const NoiseConfig& cfg, double x);

/// Piecewise constant on 2^Jmax dyadic cells of [0, 1); one column per mode.
struct NoisePath {
  int Jmax = 0;
  Eigen::MatrixXd values;  // cells x modes

  double cell_width() const { return std::ldexp(1.0, -Jmax); }
  double at(int mode, double t) const;
  double sup_bound(double q) const;
};

NoisePath sample_kick(const NoiseConfig& cfg, int modes, std::uint64_t kick, std::uint64_t member = 0);

/// Control segments for one kick: eta(t) = amplitude * sum_i path_i(t) e_i.
std::vector<Segment> kick_segments(const NoisePath& path, const std::vector<Eigen::VectorXd>& directions,
                                   double amplitude);

struct DecomposabilityReport {
  struct Level {
    int j;
    int atoms;
    double coefficient;   // per atom, against L2-normalized atoms and directions
    double level_sum;     // atoms * coefficient
    double weight;        // j^-q, sup-norm contribution
    double partial_weight_sum;
  };
  std::vector<double> direction_norms;
  std::vector<Level> levels;
  double tail_bound = 0.0;  // sum_{j > Jmax} j^-q <= Jmax^(1-q)/(q-1)
  bool coefficients_summable = false;

  nlohmann::json to_json() const;
};

DecomposabilityReport decomposability_report(const NoiseConfig& cfg, const std::vector<double>& direction_norms);

std::string noise_path_csv(const NoisePath& path);

}  // namespace pesat
