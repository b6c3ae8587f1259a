#include "pesat/haar_noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pesat/error.hpp"

namespace pesat {

void NoiseConfig::validate() const {
  PESAT_DEMAND(q > 1.0, ErrorKind::ConfigError, "noise.q must exceed 1");
  PESAT_DEMAND(Jmax >= 0 && Jmax <= 20, ErrorKind::ConfigError, "noise.Jmax must be in 0..20");
  PESAT_DEMAND(amplitude >= 0.0, ErrorKind::ConfigError, "noise.amplitude must be nonnegative");
  if (density == Density::Table) {
    PESAT_DEMAND(table.size() >= 3 && table.size() % 2 == 1, ErrorKind::ConfigError,
                 "noise.table needs an odd number (>= 3) of nodes so that 0 is a node");
    for (double v : table) PESAT_DEMAND(v >= 0.0 && std::isfinite(v), ErrorKind::ConfigError, "noise.table must be nonnegative");
    PESAT_DEMAND(table[table.size() / 2] > 0.0, ErrorKind::ConfigError, "noise density must be positive at 0");
  }
}

int haar(int j, int l, double t) {
  if (j == 0) {
    PESAT_DEMAND(l == 0, ErrorKind::IndexOutOfRange, "level 0 has a single atom");
    return t >= 0.0 && t < 1.0 ? 1 : 0;
  }
  PESAT_DEMAND(j >= 1 && j <= 62, ErrorKind::IndexOutOfRange, "Haar level out of range");
  PESAT_DEMAND(l >= 0 && l < (1LL << (j - 1)), ErrorKind::IndexOutOfRange, "Haar shift out of range");
  const double width = std::ldexp(1.0, 1 - j);
  const double a = l * width, mid = a + width / 2, b = a + width;
  if (t >= a && t < mid) return 1;
  if (t >= mid && t < b) return -1;
  return 0;
}

namespace {

// Piecewise-linear table density, normalized to unit mass.
struct Table {
  std::vector<double> nodes, values;
  double mass = 0.0;
  explicit Table(const std::vector<double>& t) : values(t) {
    const int n = static_cast<int>(t.size()) - 1;
    for (int i = 0; i <= n; ++i) nodes.push_back(-1.0 + 2.0 * i / n);
    for (int i = 0; i < n; ++i) mass += 0.5 * (t[i] + t[i + 1]) * (nodes[i + 1] - nodes[i]);
    PESAT_DEMAND(mass > 0, ErrorKind::ConfigError, "noise.table has zero mass");
  }
  double pdf(double x) const {
    if (x < -1.0 || x > 1.0) return 0.0;
    const int n = static_cast<int>(values.size()) - 1;
    const double s = (x + 1.0) / 2.0 * n;
    const int i = std::min(static_cast<int>(s), n - 1);
    const double f = s - i;
    return ((1 - f) * values[i] + f * values[i + 1]) / mass;
  }
  double cdf(double x) const {
    if (x <= -1.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      const double a = nodes[i], b = std::min(nodes[i + 1], x);
      if (b <= a) break;
      acc += 0.5 * (pdf(a) + pdf(b)) * (b - a);
    }
    return acc;
  }
  double peak() const { return *std::max_element(values.begin(), values.end()) / mass; }
};

}  // namespace

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t member, std::uint64_t kick) {
  auto lo = [](std::uint64_t x) { return static_cast<std::uint32_t>(x); };
  auto hi = [](std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(member), hi(member), lo(kick), hi(kick)};
  engine_.seed(seq);
}

double NoiseStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double sample_density(const NoiseConfig& cfg, NoiseStream& rng) {
  if (cfg.density == Density::Triangular) return rng.uniform() + rng.uniform() - 1.0;
  const Table t(cfg.table);
  const double peak = t.peak();
  for (;;) {
    const double x = 2.0 * rng.uniform() - 1.0;
    if (rng.uniform() * peak < t.pdf(x)) return x;
  }
}

double density_pdf(const NoiseConfig& cfg, double x) {
  if (cfg.density == Density::Triangular) return std::max(0.0, 1.0 - std::abs(x));
  return Table(cfg.table).pdf(x);
}

double density_cdf(const NoiseConfig& cfg, double x) {
  if (cfg.density == Density::Triangular) {
    if (x <= -1.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x < 0 ? 0.5 * (1 + x) * (1 + x) : 1.0 - 0.5 * (1 - x) * (1 - x);
  }
  return Table(cfg.table).cdf(x);
}

double NoisePath::at(int mode, double t) const {
  if (t < 0.0 || t >= 1.0) return 0.0;
  const int cell = std::min(static_cast<int>(t / cell_width()), static_cast<int>(values.rows()) - 1);
  return values(cell, mode);
}

double NoisePath::sup_bound(double q) const {
  double s = 1.0;
  for (int j = 1; j <= Jmax; ++j) s += std::pow(j, -q);
  return s;
}

NoisePath sample_kick(const NoiseConfig& cfg, int modes, std::uint64_t kick, std::uint64_t member) {
  cfg.validate();
  NoiseStream rng(cfg.seed, member, kick);
  NoisePath path;
  path.Jmax = cfg.Jmax;
  const int cells = 1 << cfg.Jmax;
  path.values = Eigen::MatrixXd::Zero(cells, modes);
  for (int i = 0; i < modes; ++i) {
    const double base = sample_density(cfg, rng);
    path.values.col(i).setConstant(base);
    for (int j = 1; j <= cfg.Jmax; ++j) {
      const double w = std::pow(j, -cfg.q);
      const int atoms = 1 << (j - 1);
      std::vector<double> xi(atoms);
      for (auto& x : xi) x = sample_density(cfg, rng);
      for (int c = 0; c < cells; ++c) {
        const int l = c >> (cfg.Jmax - j + 1);
        const int sign = ((c >> (cfg.Jmax - j)) & 1) ? -1 : 1;
        path.values(c, i) += w * sign * xi[l];
      }
    }
    const double bound = path.sup_bound(cfg.q);
    PESAT_DEMAND(path.values.col(i).cwiseAbs().maxCoeff() <= bound * (1 + 1e-12), ErrorKind::PreconditionViolation,
                 "noise path exceeds its sup bound");
  }
  return path;
}

std::vector<Segment> kick_segments(const NoisePath& path, const std::vector<Eigen::VectorXd>& directions,
                                   double amplitude) {
  PESAT_DEMAND(static_cast<int>(directions.size()) == path.values.cols(), ErrorKind::ShapeViolation,
               "one direction per noise mode is required");
  std::vector<Segment> out;
  for (int c = 0; c < path.values.rows(); ++c) {
    Segment s;
    s.duration = path.cell_width();
    s.eta = Eigen::VectorXd::Zero(directions.empty() ? 0 : directions[0].size());
    for (std::size_t i = 0; i < directions.size(); ++i) s.eta += amplitude * path.values(c, i) * directions[i];
    out.push_back(std::move(s));
  }
  return out;
}

DecomposabilityReport decomposability_report(const NoiseConfig& cfg, const std::vector<double>& direction_norms) {
  cfg.validate();
  DecomposabilityReport r;
  r.direction_norms = direction_norms;
  double partial = 1.0;
  r.levels.push_back({0, 1, 1.0, 1.0, 1.0, partial});
  for (int j = 1; j <= cfg.Jmax; ++j) {
    const double w = std::pow(j, -cfg.q);
    partial += w;
    const int atoms = 1 << (j - 1);
    // |h_jl|_L2 = 2^(-(j-1)/2)
    const double coef = w * std::pow(2.0, -(j - 1) / 2.0);
    r.levels.push_back({j, atoms, coef, atoms * coef, w, partial});
  }
  r.tail_bound = cfg.Jmax == 0 ? INFINITY : std::pow(cfg.Jmax, 1.0 - cfg.q) / (cfg.q - 1.0);
  // Per-level sums behave like 2^((j-1)/2) j^-q, which never decays.
  r.coefficients_summable = false;
  return r;
}

nlohmann::json DecomposabilityReport::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& l : levels) {
    lv.push_back({{"j", l.j},
                  {"atoms", l.atoms},
                  {"coefficient", l.coefficient},
                  {"level_sum", l.level_sum},
                  {"weight", l.weight},
                  {"partial_weight_sum", l.partial_weight_sum}});
  }
  return {{"direction_norms", direction_norms},
          {"levels", lv},
          {"tail_bound", tail_bound},
          {"coefficients_summable", coefficients_summable}};
}

std::string noise_path_csv(const NoisePath& path) {
  std::ostringstream os;
  os.precision(17);
  os << "t";
  for (int i = 0; i < path.values.cols(); ++i) os << ",mode" << i + 1;
  os << "\n";
  for (int c = 0; c < path.values.rows(); ++c) {
    os << c * path.cell_width();
    for (int i = 0; i < path.values.cols(); ++i) os << "," << path.values(c, i);
    os << "\n";
  }
  return os.str();
}

}  // namespace pesat
