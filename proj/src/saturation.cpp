#include "pesat/saturation.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>

#include <Eigen/LU>

#include "pesat/field_json.hpp"
#include "pesat/operators.hpp"
#include "pesat/row_reduce.hpp"
#include "pesat/seeds.hpp"

namespace pesat {

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Seed: return "Seed";
    case NodeKind::FrakB2: return "FrakB2";
    case NodeKind::Q1Image: return "Q1Image";
    case NodeKind::CrossB1: return "CrossB1";
    case NodeKind::B1Image: return "B1Image";
    case NodeKind::LinBracket: return "LinBracket";
    case NodeKind::LinearCombo: return "LinearCombo";
  }
  return "Unknown";
}

int DerivationTree::add(DerivationNode node) {
  nodes.push_back(std::move(node));
  return static_cast<int>(nodes.size()) - 1;
}

RState DerivationTree::evaluate(int i) const {
  const DerivationNode& n = nodes.at(i);
  auto val = [&](std::size_t c) -> const RState& { return nodes.at(n.children.at(c)).value; };
  switch (n.kind) {
    case NodeKind::Seed: return seeds.at(n.seed_index);
    case NodeKind::FrakB2: return temperature_state(frak_b2(val(0).theta, val(1).theta));
    case NodeKind::Q1Image: return velocity_state(q1_theta(val(0).theta));
    case NodeKind::CrossB1: return velocity_state(op_b1(val(0).v, val(1).v));
    case NodeKind::B1Image: return velocity_state(op_B1(val(0).v));
    case NodeKind::LinBracket: return op_b(val(0), val(1));
    case NodeKind::LinearCombo: {
      RState out;
      for (std::size_t c = 0; c < n.children.size(); ++c) out += n.coeffs.at(c) * val(c);
      return out;
    }
  }
  throw Error(ErrorKind::PreconditionViolation, "unknown node kind");
}

bool DerivationTree::verify() const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (int c : nodes[i].children) {
      if (c < 0 || static_cast<std::size_t>(c) >= i) return false;  // children precede parents
    }
    if (!(evaluate(static_cast<int>(i)) == nodes[i].value)) return false;
  }
  return true;
}

nlohmann::json DerivationTree::to_json() const {
  nlohmann::json js = nlohmann::json::array();
  for (const auto& s : seeds) js.push_back(pesat::to_json(s));
  nlohmann::json jn = nlohmann::json::array();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const DerivationNode& n = nodes[i];
    nlohmann::json e{{"id", i}, {"kind", to_string(n.kind)}, {"children", n.children}, {"step", n.step}};
    if (n.kind == NodeKind::Seed) e["seed"] = n.seed_index;
    if (!n.coeffs.empty()) {
      std::vector<std::string> cs;
      for (const auto& c : n.coeffs) cs.push_back(c.get_str());
      e["coeffs"] = cs;
    }
    e["value"] = pesat::to_json(n.value);
    jn.push_back(std::move(e));
  }
  return {{"seeds", js}, {"nodes", jn}};
}

Subspace seed_H10() { return {seed_H10_directions<Rational>()}; }
Subspace seed_Htilde() { return {seed_Htilde_directions<Rational>()}; }

nlohmann::json ChainReport::to_json(bool with_tree) const {
  nlohmann::json steps_js = nlohmann::json::array();
  for (const auto& s : steps) {
    steps_js.push_back({{"j", s.j},
                        {"dim_theta", s.dim_theta},
                        {"dim_v", s.dim_v},
                        {"dim_total", s.dim_total},
                        {"dim_contained", s.dim_contained}});
  }
  nlohmann::json out{{"trunc", {{"M", trunc.M}, {"P", trunc.P}}},
                     {"cap", {{"M", cap.M}, {"P", cap.P}}},
                     {"full_dim", full_dim},
                     {"steps", steps_js},
                     {"reached_full", reached_full},
                     {"stop_j", stop_j},
                     {"witness_count", witness_count},
                     {"seconds", seconds}};
  if (with_tree) out["tree"] = tree.to_json();
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

// Accepts states that enlarge the span over the capped mode set and keeps
// exact ranks of the truncated projection and of the part lying inside the
// truncation.
class Track {
 public:
  Track(const ModeSpace& cap, const ModeSpace& trunc)
      : cap_(cap), trunc_(trunc), filter_(cap.dim()) {
    inside_.resize(cap.dim());
    for (int i = 0; i < cap.dim(); ++i) inside_[i] = trunc.truncation().contains(cap.element(i).key);
  }

  bool offer(const RState& u) {
    const SparseRow coords = cap_.coordinates(u);
    if (coords.empty() || !filter_.insert(modp::from_row(coords))) return false;
    const bool fresh = exact_.insert(coords);
    PESAT_DEMAND(fresh, ErrorKind::PreconditionViolation, "modular and exact ranks disagree");
    trunc_rank_.insert(trunc_.coordinates(u));
    SparseRow outside;
    for (const auto& e : coords) {
      if (!inside_[e.first]) outside.push_back(e);
    }
    outside_.insert(outside);
    return true;
  }

  ModRow residual(const RState& u) const { return filter_.reduce(modp::from_row(cap_.coordinates(u))); }
  bool contains_exact(const RState& u) const { return exact_.contains(cap_.coordinates(u)); }
  bool saturated() const { return filter_.full(); }
  int trunc_rank() const { return trunc_rank_.rank(); }
  int contained_rank() const { return exact_.rank() - outside_.rank(); }

 private:
  const ModeSpace& cap_;
  const ModeSpace& trunc_;
  ModReducer filter_;
  RowReducer exact_;
  RowReducer trunc_rank_;
  RowReducer outside_;
  std::vector<bool> inside_;
};

struct Candidate {
  NodeKind kind;
  std::vector<int> children;
  RState value;
};

std::size_t term_count(const RState& u) { return u.v.size() + u.theta.size(); }

// Derivatives and transports cached per generator.
struct Grad {
  RScalarField x, y, z;
  explicit Grad(const RScalarField& s) : x(d_x(s)), y(d_y(s)), z(d_z(s)) {}
};

struct Advector {
  RScalarField a0, a1, w;
  explicit Advector(const RVectorField& v) : a0(component(v, 0)), a1(component(v, 1)), w(vertical_velocity(v)) {}
  RScalarField apply(const Grad& g) const { return product(a0, g.x) + product(a1, g.y) + product(w, g.z); }
};

struct ThetaGen {
  int node;
  Grad grad;
  RVectorField q;
  Advector adv;
  ThetaGen(int n, const RScalarField& th) : node(n), grad(th), q(q1_theta(th)), adv(q) {}
};

struct VelocityGen {
  int node;
  Advector adv;
  Grad g0, g1;
  RVectorField b1;
  bool b1_fits;
  bool self_free;
  ModRow b1_mod;
  VelocityGen(int n, const RVectorField& v, const Truncation& cap)
      : node(n), adv(v), g0(component(v, 0)), g1(component(v, 1)) {
    b1 = leray_project(from_components(adv.apply(g0), adv.apply(g1)));
    self_free = b1.empty();
    b1_fits = fits(velocity_state(b1), cap);
  }
};

RVectorField cross(const VelocityGen& a, const VelocityGen& b) {
  return leray_project(from_components(a.adv.apply(b.g0) + b.adv.apply(a.g0), a.adv.apply(b.g1) + b.adv.apply(a.g1)));
}

RScalarField bracket(const ThetaGen& a, const ThetaGen& b) { return a.adv.apply(b.grad) - b.adv.apply(a.grad); }

Truncation cap_of(Truncation t, const ChainOptions& opt) { return {t.M + opt.cap_extra_m, t.P + opt.cap_extra_p}; }

constexpr std::size_t kChunk = 2048;

class NonlinearEngine {
 public:
  NonlinearEngine(Truncation trunc, const ChainOptions& opt)
      : opt_(opt), cap_(cap_of(trunc, opt)), cap_space_(cap_), trunc_space_(trunc),
        theta_(cap_space_, trunc_space_), vel_(cap_space_, trunc_space_) {}

  void seed(const Subspace& h) {
    for (std::size_t i = 0; i < h.basis.size(); ++i) {
      const RState& s = h.basis[i];
      PESAT_DEMAND(in_state_space(s), ErrorKind::RoleViolation, "seed outside the state space");
      PESAT_DEMAND(s.v.empty() || s.theta.empty(), ErrorKind::ShapeViolation,
                   "seed directions must be pure velocity or pure temperature");
      PESAT_DEMAND(fits(s, cap_), ErrorKind::ShapeViolation, "seed exceeds the working modes");
      report_.tree.seeds.push_back(s);
      DerivationNode n;
      n.kind = NodeKind::Seed;
      n.seed_index = static_cast<int>(i);
      n.value = s;
      offer({NodeKind::Seed, {}, s}, std::move(n));
    }
  }

  void step(int j) {
    step_ = j;
    const std::size_t nt = thetas_.size(), nv = vels_.size();
    const std::size_t pt = theta_mark_, pv = vel_mark_;
    theta_mark_ = nt;
    vel_mark_ = nv;

    // Opposite-sign pairs of self-advection images, read off the span at the
    // start of the step.
    std::vector<Candidate> pending;
    if (opt_.grow_velocity && opt_.mode == F1Mode::Provable) {
      std::map<ModRow, std::size_t> seen;
      for (std::size_t g = 0; g < nv; ++g) {
        const VelocityGen& z = vels_[g];
        if (!z.b1_fits || z.self_free) continue;
        ModRow r = vel_.residual(velocity_state(z.b1));
        if (r.empty()) continue;
        ModRow neg = r;
        for (auto& e : neg) e.second = modp::neg(e.second);
        auto it = seen.find(neg);
        if (it != seen.end()) {
          const VelocityGen& partner = vels_[it->second];
          if (vel_.contains_exact(velocity_state(RVectorField(z.b1 + partner.b1)))) {
            pending.push_back({NodeKind::B1Image, {z.node, partner.node}, velocity_state(z.b1)});
          }
        }
        seen.emplace(std::move(r), g);
      }
    }

    if (opt_.grow_theta) {
      for (std::size_t b = pt; b < nt && !theta_.saturated(); ++b) {
        for (std::size_t a = 0; a < b; ++a) {
          RScalarField f = bracket(thetas_[a], thetas_[b]);
          if (f.empty()) continue;
          add(pending, {NodeKind::FrakB2, {thetas_[a].node, thetas_[b].node}, temperature_state(std::move(f))});
        }
      }
    }
    if (opt_.grow_velocity) {
      for (std::size_t g = pt; g < nt; ++g) {
        if (!thetas_[g].q.empty()) add(pending, {NodeKind::Q1Image, {thetas_[g].node}, velocity_state(thetas_[g].q)});
      }
      const bool all_pairs = opt_.mode == F1Mode::Span;
      for (std::size_t b = pv; b < nv && !vel_.saturated(); ++b) {
        if (all_pairs && !vels_[b].b1.empty()) {
          add(pending, {NodeKind::B1Image, {vels_[b].node}, velocity_state(vels_[b].b1)});
        }
        for (std::size_t a = 0; a < b; ++a) {
          if (!all_pairs && !vels_[a].self_free && !vels_[b].self_free) continue;
          RVectorField c = cross(vels_[a], vels_[b]);
          if (c.empty()) continue;
          add(pending, {NodeKind::CrossB1, {vels_[a].node, vels_[b].node}, velocity_state(std::move(c))});
        }
      }
    }
    flush(pending);
  }

  int dim_theta() const { return theta_.trunc_rank(); }
  int dim_v() const { return vel_.trunc_rank(); }
  int contained() const { return theta_.contained_rank() + vel_.contained_rank(); }
  const Truncation& cap() const { return cap_; }
  ChainReport& report() { return report_; }

 private:
  void add(std::vector<Candidate>& pending, Candidate c) {
    if (!fits(c.value, cap_)) return;
    pending.push_back(std::move(c));
    if (pending.size() >= kChunk) flush(pending);
  }

  void flush(std::vector<Candidate>& pending) {
    std::stable_sort(pending.begin(), pending.end(),
                     [](const Candidate& a, const Candidate& b) { return term_count(a.value) < term_count(b.value); });
    for (auto& c : pending) {
      DerivationNode n;
      n.kind = c.kind;
      n.children = c.children;
      offer(std::move(c), std::move(n));
    }
    pending.clear();
  }

  void offer(Candidate c, DerivationNode n) {
    const bool is_theta = c.value.v.empty();
    Track& track = is_theta ? theta_ : vel_;
    if (!track.offer(c.value)) return;
    n.step = step_;
    n.value = std::move(c.value);
    const int id = report_.tree.add(std::move(n));
    report_.generators.push_back(id);
    const RState& value = report_.tree.nodes[id].value;
    if (is_theta) {
      thetas_.emplace_back(id, value.theta);
    } else {
      vels_.emplace_back(id, value.v, cap_);
    }
  }

  ChainOptions opt_;
  Truncation cap_;
  ModeSpace cap_space_, trunc_space_;
  Track theta_, vel_;
  std::vector<ThetaGen> thetas_;
  std::vector<VelocityGen> vels_;
  std::size_t theta_mark_ = 0, vel_mark_ = 0;
  int step_ = 0;
  ChainReport report_;
};

class LinearEngine {
 public:
  LinearEngine(Truncation trunc, const ChainOptions& opt)
      : cap_(cap_of(trunc, opt)), cap_space_(cap_), trunc_space_(trunc), all_(cap_space_, trunc_space_) {}

  void seed(const Subspace& h) {
    for (std::size_t i = 0; i < h.basis.size(); ++i) {
      const RState& s = h.basis[i];
      PESAT_DEMAND(s.v.empty(), ErrorKind::ShapeViolation, "linearized chain needs seeds with no velocity part");
      PESAT_DEMAND(in_state_space(s), ErrorKind::RoleViolation, "seed outside the state space");
      PESAT_DEMAND(fits(s, cap_), ErrorKind::ShapeViolation, "seed exceeds the working modes");
      report_.tree.seeds.push_back(s);
      DerivationNode n;
      n.kind = NodeKind::Seed;
      n.seed_index = static_cast<int>(i);
      n.value = s;
      const int id = report_.tree.add(std::move(n));
      movers_.push_back(id);
      accept(id);
    }
    // First bracket slot ranges over the seeds and their Q images.
    const std::size_t ns = movers_.size();
    for (std::size_t i = 0; i < ns; ++i) {
      DerivationNode n;
      n.kind = NodeKind::Q1Image;
      n.children = {movers_[i]};
      n.value = velocity_state(q1_theta(report_.tree.nodes[movers_[i]].value.theta));
      if (n.value.v.empty()) continue;
      movers_.push_back(report_.tree.add(std::move(n)));
    }
  }

  void step(int j) {
    step_ = j;
    const std::size_t n = gens_.size(), prev = mark_;
    mark_ = n;
    std::vector<Candidate> pending;
    for (std::size_t g = prev; g < n && !all_.saturated(); ++g) {
      const RState& val = report_.tree.nodes[gens_[g]].value;
      if (!val.theta.empty()) {
        RVectorField q = q1_theta(val.theta);
        if (!q.empty()) pending.push_back({NodeKind::Q1Image, {gens_[g]}, velocity_state(std::move(q))});
      }
      for (int m : movers_) {
        RState b = op_b(report_.tree.nodes[m].value, val);
        if (term_count(b) == 0 || !fits(b, cap_)) continue;
        pending.push_back({NodeKind::LinBracket, {m, gens_[g]}, std::move(b)});
      }
    }
    std::stable_sort(pending.begin(), pending.end(),
                     [](const Candidate& a, const Candidate& b) { return term_count(a.value) < term_count(b.value); });
    for (auto& c : pending) {
      if (!all_.offer(c.value)) continue;
      DerivationNode node;
      node.kind = c.kind;
      node.children = c.children;
      node.step = j;
      node.value = std::move(c.value);
      accept(report_.tree.add(std::move(node)), false);
    }
  }

  int dim_total() const { return all_.trunc_rank(); }
  int dim_theta() const { return theta_proj_.rank(); }
  int dim_v() const { return v_proj_.rank(); }
  int contained() const { return all_.contained_rank(); }
  const Truncation& cap() const { return cap_; }
  ChainReport& report() { return report_; }

 private:
  void accept(int id, bool offer = true) {
    const RState& u = report_.tree.nodes[id].value;
    if (offer && !all_.offer(u)) return;
    report_.generators.push_back(id);
    gens_.push_back(id);
    theta_proj_.insert(trunc_space_.coordinates(temperature_state(u.theta)));
    v_proj_.insert(trunc_space_.coordinates(velocity_state(u.v)));
  }

  Truncation cap_;
  ModeSpace cap_space_, trunc_space_;
  Track all_;
  RowReducer theta_proj_, v_proj_;
  std::vector<int> movers_, gens_;
  std::size_t mark_ = 0;
  int step_ = 0;
  ChainReport report_;
};

template <typename Engine, typename Dims>
ChainReport run(Engine& engine, const Subspace& seeds, int max_j, Truncation trunc, const ChainOptions& opt,
                Dims dims) {
  PESAT_DEMAND(max_j >= 1, ErrorKind::PreconditionViolation, "max_j must be at least 1");
  const auto t0 = Clock::now();
  engine.seed(seeds);
  const int full = ModeSpace(trunc).dim();
  auto record = [&](int j) {
    ChainStep s = dims(engine);
    s.j = j;
    engine.report().steps.push_back(s);
    if (s.dim_total == full && !engine.report().reached_full) {
      engine.report().reached_full = true;
      engine.report().stop_j = j;
    }
  };
  record(0);
  for (int j = 1; j <= max_j; ++j) {
    if (engine.report().reached_full && opt.stop_when_full) break;
    engine.step(j);
    record(j);
  }
  ChainReport out = std::move(engine.report());
  out.trunc = trunc;
  out.cap = engine.cap();
  out.full_dim = full;
  out.witness_count = static_cast<int>(out.generators.size());
  out.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return out;
}

}  // namespace

ChainReport chain(const Subspace& seeds, int max_j, Truncation trunc, ChainOptions opt) {
  NonlinearEngine engine(trunc, opt);
  return run(engine, seeds, max_j, trunc, opt, [](const NonlinearEngine& e) {
    ChainStep s;
    s.dim_theta = e.dim_theta();
    s.dim_v = e.dim_v();
    s.dim_total = s.dim_theta + s.dim_v;
    s.dim_contained = e.contained();
    return s;
  });
}

ChainReport lin_chain(const Subspace& seeds, int max_j, Truncation trunc, ChainOptions opt) {
  LinearEngine engine(trunc, opt);
  return run(engine, seeds, max_j, trunc, opt, [](const LinearEngine& e) {
    ChainStep s;
    s.dim_theta = e.dim_theta();
    s.dim_v = e.dim_v();
    s.dim_total = e.dim_total();
    s.dim_contained = e.contained();
    return s;
  });
}

Subspace f2_step(const Subspace& s2, Truncation trunc) {
  ChainOptions opt;
  opt.grow_velocity = false;
  opt.stop_when_full = false;
  const ChainReport r = chain(s2, 1, trunc, opt);
  Subspace out;
  for (int id : r.generators) out.basis.push_back(r.tree.nodes[id].value);
  return out;
}

Subspace f1_step(const Subspace& s, F1Mode mode, Truncation trunc) {
  ChainOptions opt;
  opt.mode = mode;
  opt.grow_theta = false;
  opt.stop_when_full = false;
  const ChainReport r = chain(s, 1, trunc, opt);
  Subspace out;
  for (int id : r.generators) {
    const RState& u = r.tree.nodes[id].value;
    if (!u.v.empty()) out.basis.push_back(u);
  }
  return out;
}

bool span_contains(const Subspace& s, const RState& u, Truncation t) {
  const ModeSpace space(t);
  RowReducer red;
  for (const auto& b : s.basis) {
    PESAT_DEMAND(fits(b, t), ErrorKind::ShapeViolation, "basis vector exceeds the given modes");
    red.insert(space.coordinates(b));
  }
  return fits(u, t) && red.contains(space.coordinates(u));
}

Subspace generators(const ChainReport& r) {
  Subspace out;
  for (int id : r.generators) out.basis.push_back(r.tree.nodes[id].value);
  return out;
}

int float_rank(const ChainReport& report, double tol) {
  const ModeSpace space(report.trunc);
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(report.generators.size()), space.dim());
  Eigen::Index r = 0;
  for (int id : report.generators) {
    Eigen::VectorXd x = space.orthonormal(cast<double>(report.tree.nodes[id].value));
    const double n = x.norm();
    if (n == 0.0) continue;
    rows.row(r++) = x / n;
  }
  if (r == 0) return 0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(rows.topRows(r));
  lu.setThreshold(tol);
  return static_cast<int>(lu.rank());
}

}  // namespace pesat
