#include "pesat/experiments.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <gmp.h>

#include "pesat/control.hpp"
#include "pesat/field_json.hpp"
#include "pesat/gramian.hpp"
#include "pesat/identities.hpp"
#include "pesat/mixing.hpp"
#include "pesat/saturation.hpp"
#include "pesat/seeds.hpp"

namespace pesat {

namespace fs = std::filesystem;

namespace {

class Artifacts {
 public:
  explicit Artifacts(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void json(const std::string& name, const nlohmann::json& j) { text(name, j.dump(2) + "\n"); }

  void text(const std::string& name, const std::string& body) {
    std::ofstream out(fs::path(dir_) / name, std::ios::binary);
    PESAT_DEMAND(out.good(), ErrorKind::PreconditionViolation, "cannot write " + name);
    out << body;
    names_.push_back(name);
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::string dir_;
  std::vector<std::string> names_;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Eigen::VectorXd state(const GalerkinModel& model, const std::string& expr) {
  const RState u = parse_state(expr);
  PESAT_DEMAND(fits(u, model.space().truncation()), ErrorKind::ShapeViolation,
               "state '" + expr + "' does not fit the truncation");
  return model.coords(cast<double>(u));
}

nlohmann::json run_identities(const RunConfig&, Artifacts& out, std::ostream& log, std::optional<Error>& failure) {
  nlohmann::json rows = nlohmann::json::array();
  int passed = 0;
  const auto results = verify_identities();
  for (const auto& r : results) {
    rows.push_back({{"name", r.name}, {"instance", r.instance}, {"status", r.passed ? "PASS" : "FAIL"}});
    passed += r.passed;
  }
  if (passed != static_cast<int>(results.size())) {
    failure = Error(ErrorKind::PreconditionViolation, std::to_string(results.size() - passed) + " identities failed");
  }
  out.json("identities.json", {{"identities", rows}, {"passed", passed}, {"total", results.size()}});
  log << "identities: " << passed << "/" << results.size() << " PASS\n";
  return {{"passed", passed}, {"total", results.size()}};
}

nlohmann::json run_saturate(const RunConfig& cfg, Artifacts& out, std::ostream& log) {
  const Truncation trunc = cfg.galerkin().trunc;
  const std::string which = cfg.get("experiment", "seeds");
  Subspace seeds;
  if (which == "H10") seeds = seed_H10();
  else if (which == "Htilde") seeds = seed_Htilde();
  else seeds.basis.push_back(temperature_state(phi<Rational>(5)));
  ChainOptions opt;
  opt.mode = cfg.get("experiment", "mode") == "span" ? F1Mode::Span : F1Mode::Provable;
  const int max_j = cfg.get_int("experiment", "max_j");
  const ChainReport r = cfg.get_bool("experiment", "linear") ? lin_chain(seeds, max_j, trunc, opt)
                                                              : chain(seeds, max_j, trunc, opt);
  nlohmann::json j = r.to_json(true);
  j.erase("seconds");
  out.json("saturation.json", j);
  std::string csv = "j,dim_theta,dim_v,dim_total,dim_contained\n";
  for (const auto& s : r.steps) {
    csv += std::to_string(s.j) + "," + std::to_string(s.dim_theta) + "," + std::to_string(s.dim_v) + "," +
           std::to_string(s.dim_total) + "," + std::to_string(s.dim_contained) + "\n";
  }
  out.text("dims.csv", csv);
  log << "saturate: reached_full=" << (r.reached_full ? "true" : "false") << " stop_j=" << r.stop_j
      << " full_dim=" << r.full_dim << " (" << r.seconds << " s)\n";
  return {{"reached_full", r.reached_full}, {"stop_j", r.stop_j}, {"full_dim", r.full_dim}};
}

nlohmann::json run_simulate(const RunConfig& cfg, Artifacts& out, std::ostream& log) {
  const GalerkinModel model(cfg.galerkin());
  const Eigen::VectorXd u0 = state(model, cfg.get("experiment", "u0"));
  Segment seg;
  seg.duration = cfg.get_double("experiment", "duration");
  const std::vector<Segment> segs{seg};
  const Trajectory traj = model.solve(u0, segs, true);
  std::string csv = "t,energy,l2,h1\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const auto& x = traj.states[i];
    csv += fmt(traj.times[i]) + "," + fmt(0.5 * x.squaredNorm()) + "," + fmt(x.norm()) + "," +
           fmt(model.space().sobolev_norm(x, 1)) + "\n";
  }
  out.text("trajectory.csv", csv);
  const std::vector<double> res = energy_report(traj, model, segs);
  std::string ecsv = "step,residual\n";
  double worst = 0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    ecsv += std::to_string(i) + "," + fmt(res[i]) + "\n";
    worst = std::max(worst, std::abs(res[i]));
  }
  out.text("energy.csv", ecsv);
  out.json("final_state.json", to_json(model.field(traj.states.back())));
  log << "simulate: steps=" << res.size() << " final_l2=" << traj.states.back().norm()
      << " max_energy_residual=" << worst << "\n";
  return {{"steps", res.size()}, {"final_l2", traj.states.back().norm()}, {"max_energy_residual", worst}};
}

nlohmann::json run_probes(const RunConfig& cfg, Artifacts& out, std::ostream& log) {
  const GalerkinModel model(cfg.galerkin());
  const Eigen::VectorXd u0 = state(model, cfg.get("experiment", "u0"));
  const auto deltas = cfg.get_doubles("experiment", "deltas");
  const int steps = cfg.get_int("experiment", "probe_steps");
  nlohmann::json xs = nlohmann::json::array(), zs = nlohmann::json::array();
  for (const auto& expr : cfg.get_items("experiment", "probe_xi")) {
    const ProbeTable t = limit_probe_xi(model, u0, state(model, expr), deltas, steps);
    xs.push_back({{"xi", expr}, {"table", t.to_json()}});
    log << "probe xi=" << expr << ": alpha=" << t.alpha << " monotone=" << t.monotone << "\n";
  }
  for (const auto& item : cfg.get_items("experiment", "probe_zeta")) {
    const auto bar = item.find('|');
    auto trim = [](std::string x) {
      x.erase(0, x.find_first_not_of(' '));
      x.erase(x.find_last_not_of(' ') + 1);
      return x;
    };
    const std::string z = trim(item.substr(0, bar)), e = trim(item.substr(bar + 1));
    const ProbeTable t = limit_probe_zeta(model, u0, state(model, z), state(model, e), deltas, steps);
    zs.push_back({{"zeta", z}, {"eta", e}, {"table", t.to_json()}});
    log << "probe zeta=" << z << " eta=" << e << ": alpha=" << t.alpha << " monotone=" << t.monotone << "\n";
  }
  const nlohmann::json j{{"u0", cfg.get("experiment", "u0")}, {"xi", xs}, {"zeta", zs}};
  out.json("probes.json", j);
  return j;
}

nlohmann::json run_steer(const RunConfig& cfg, Artifacts& out, std::ostream& log, std::optional<Error>& failure) {
  const GalerkinModel model(cfg.galerkin());
  const Eigen::VectorXd u0 = state(model, cfg.get("experiment", "u0"));
  const auto controls = control_directions(model);
  SteerSettings s;
  s.moves.delta = cfg.get_double("experiment", "move_delta");
  s.max_moves = cfg.get_int("experiment", "max_moves");
  s.correction_iterations = cfg.get_int("experiment", "corrections");
  const double T = cfg.get_double("experiment", "T"), eps = cfg.get_double("experiment", "eps");
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& expr : cfg.get_items("experiment", "targets")) {
    try {
      const SteeringReport r = steer(model, u0, state(model, expr), T, eps, controls, s);
      nlohmann::json j = r.to_json(model);
      const Eigen::VectorXd again = apply(model, u0, r.schedule);
      j["replay_identical"] = again == r.achieved;
      j["within_eps"] = r.error_l2 < eps * r.target_norm;
      rows.push_back({{"target_expr", expr}, {"status", "ok"}, {"report", j}});
      log << "steer " << expr << ": error_L2/|target|=" << r.error_l2 / r.target_norm << " moves=" << r.moves.size()
          << "\n";
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotInSpan && e.kind() != ErrorKind::BudgetExceeded) throw;
      if (!failure) failure = Error(e.kind(), expr + ": " + e.what());
      rows.push_back({{"target_expr", expr}, {"status", to_string(e.kind())}, {"message", e.what()}});
      log << "steer " << expr << ": " << e.what() << "\n";
    }
  }
  out.json("steering.json", {{"u0", cfg.get("experiment", "u0")}, {"T", T}, {"eps", eps}, {"targets", rows}});
  return {{"targets", rows.size()}};
}

Trajectory rest_reference(const GalerkinModel& model, double tau) {
  Trajectory t;
  const int n = static_cast<int>(std::lround(tau / model.config().dt));
  for (int k = 0; k <= n; ++k) {
    t.times.push_back(k * model.config().dt);
    t.states.push_back(Eigen::VectorXd::Zero(model.dim()));
  }
  t.segment.assign(static_cast<std::size_t>(n), 0);
  return t;
}

nlohmann::json run_gramian(const RunConfig& cfg, Artifacts& out, std::ostream& log) {
  const GalerkinModel model(cfg.galerkin());
  const Eigen::VectorXd u0 = state(model, cfg.get("experiment", "u0"));
  const auto dirs = control_directions(model);
  const double tau = cfg.get_double("experiment", "tau"), tol = cfg.get_double("experiment", "rel_tolerance");
  const int ngrid = cfg.get_int("experiment", "ngrid");
  const bool adjoint = cfg.get("experiment", "route") == "adjoint";

  const LinearizedSystem rest = make_linearized(model, rest_reference(model, tau), dirs);
  const GramianResult g0 = analyze((adjoint ? gramian_adjoint(rest, tau, ngrid) : gramian(rest, tau, ngrid)).matrix, tol);
  const int shell = shell_closure_dim(model.space(), rest.controls);
  const KernelCertificate cert = kernel_certificate(model, u0, dirs, cfg.noise(), tau, ngrid,
                                                    cfg.get_int("experiment", "trials"), tol, adjoint, true);
  double worst_doubling = 0;
  for (const auto& t : cert.trials) worst_doubling = std::max(worst_doubling, t.doubling_change);
  const nlohmann::json j{{"dim", model.dim()},
                         {"rest", {{"rank", g0.rank}, {"shell_closure_dim", shell}, {"gramian", g0.to_json()}}},
                         {"certificate", cert.to_json()},
                         {"max_doubling_change", worst_doubling}};
  out.json("gramian.json", j);
  log << "gramian: rest rank " << g0.rank << "/" << model.dim() << ", positive in " << cert.fraction * 100
      << "% of trials, min floor " << cert.min_floor << ", doubling change " << worst_doubling << "\n";
  return {{"rest_rank", g0.rank}, {"fraction", cert.fraction}};
}

nlohmann::json run_mix(const RunConfig& cfg, Artifacts& out, std::ostream& log, int threads) {
  GalerkinConfig gc = cfg.galerkin();
  gc.dt = cfg.get_double("experiment", "kick_dt");
  const GalerkinModel model(gc);
  require_unforced(model);
  MixingConfig mc;
  mc.noise = cfg.noise();
  mc.noise.Jmax = cfg.get_int("experiment", "kick_Jmax");
  mc.directions = control_directions(model);
  mc.K = cfg.get_int("experiment", "K");
  mc.ensemble_size = cfg.get_int("experiment", "ensemble_size");
  mc.delta_grid = cfg.get_doubles("experiment", "delta_grid");
  mc.threads = threads;
  mc.validate();
  const Eigen::VectorXd u0 = state(model, cfg.get("experiment", "u0"));
  const Eigen::VectorXd u0b = state(model, cfg.get("experiment", "u0b"));

  const SqueezeReport sq = squeeze_check(model, cfg.get_double("experiment", "ball_radius"),
                                         cfg.get_int("experiment", "nsamples"), mc.delta_grid, mc.noise.seed);
  out.json("squeeze.json", sq.to_json());

  nlohmann::json coupling = nlohmann::json::array();
  const int nseeds = cfg.get_int("experiment", "coupling_seeds");
  for (int s = 0; s < nseeds; ++s) {
    MixingConfig m2 = mc;
    m2.noise.seed = mc.noise.seed + static_cast<std::uint64_t>(s);
    coupling.push_back({{"seed", m2.noise.seed}, {"report", coupling_decay(model, u0, u0b, m2).to_json()}});
  }
  out.json("coupling.json", coupling);

  const EnsembleDecay ed = ensemble_decay(model, u0, u0b, mc);
  std::string csv = "k,distance\n";
  for (std::size_t k = 0; k < ed.distances.size(); ++k) csv += std::to_string(k) + "," + fmt(ed.distances[k]) + "\n";
  out.text("distances.csv", csv);
  out.json("ensemble.json", ed.to_json());

  const AbsorbingReport ab = absorbing_probe(model, u0, mc, cfg.get_int("experiment", "absorbing_kicks"));
  out.json("absorbing.json", ab.to_json());
  log << "mix: squeeze a=" << sq.a << " at delta=" << sq.best_delta << "; ensemble fit C=" << ed.fit.C
      << " c=" << ed.fit.c << "; absorbing radius " << ab.radius << " with " << ab.excursions << " excursions\n";
  return {{"a", sq.a}, {"c", ed.fit.c}};
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"verify-identities", "saturate", "simulate", "probe-limits",
                                              "steer", "gramian", "mix"};
  return names;
}

nlohmann::json manifest(const std::string& sub, const RunConfig& cfg, int threads,
                        const std::vector<std::string>& outputs) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.hash()));
  return {{"tool", "pesat"},
          {"subcommand", sub},
          {"seed", cfg.get_int("noise", "seed")},
          {"threads", threads},
          {"config_hash", hash},
          {"config", cfg.flat()},
          {"outputs", outputs},
          {"versions",
           {{"pesat", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"gmp", gmp_version},
            {"boost", BOOST_LIB_VERSION},
            {"compiler", __VERSION__}}}};
}

nlohmann::json error_record(ErrorKind kind, const std::string& message, int exit_code) {
  return {{"error", to_string(kind)}, {"message", message}, {"exit_code", exit_code}};
}

int run_subcommand(const std::string& sub, const RunConfig& cfg, const std::string& out_dir, int threads,
                   std::ostream& log, std::ostream& err) {
  auto fail = [&](ErrorKind kind, const std::string& msg) {
    const int code = kind == ErrorKind::ConfigError ? 2 : 1;
    const nlohmann::json rec = error_record(kind, msg, code);
    err << rec.dump() << "\n";
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream(fs::path(out_dir) / "error.json") << rec.dump(2) << "\n";
    return code;
  };
  try {
    PESAT_DEMAND(std::find(subcommands().begin(), subcommands().end(), sub) != subcommands().end(),
                 ErrorKind::ConfigError, "unknown subcommand '" + sub + "'");
    PESAT_DEMAND(threads >= 1, ErrorKind::ConfigError, "threads must be at least 1");
    cfg.validate();
    Artifacts out(out_dir);
    std::optional<Error> failure;
    nlohmann::json summary;
    if (sub == "verify-identities") summary = run_identities(cfg, out, log, failure);
    else if (sub == "saturate") summary = run_saturate(cfg, out, log);
    else if (sub == "simulate") summary = run_simulate(cfg, out, log);
    else if (sub == "probe-limits") summary = run_probes(cfg, out, log);
    else if (sub == "steer") summary = run_steer(cfg, out, log, failure);
    else if (sub == "gramian") summary = run_gramian(cfg, out, log);
    else summary = run_mix(cfg, out, log, threads);
    std::vector<std::string> outputs = out.names();
    std::ofstream(fs::path(out_dir) / "manifest.json") << manifest(sub, cfg, threads, outputs).dump(2) << "\n";
    // Artifacts of a partial failure stay next to the error record.
    if (failure) return fail(failure->kind(), failure->what());
    return 0;
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail(ErrorKind::PreconditionViolation, e.what());
  }
}

int replay_manifest(const std::string& manifest_path, const std::string& out_dir, int threads, std::ostream& log,
                    std::ostream& err) {
  nlohmann::json m;
  try {
    std::ifstream in(manifest_path);
    PESAT_DEMAND(in.good(), ErrorKind::ConfigError, "cannot read manifest '" + manifest_path + "'");
    m = nlohmann::json::parse(in);
    const auto flat = m.at("config").get<std::map<std::string, std::string>>();
    const RunConfig cfg = RunConfig::from_map(flat);
    return run_subcommand(m.at("subcommand").get<std::string>(), cfg, out_dir, threads, log, err);
  } catch (const Error& e) {
    const nlohmann::json rec = error_record(e.kind(), e.what(), 2);
    err << rec.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    const nlohmann::json rec = error_record(ErrorKind::ConfigError, e.what(), 2);
    err << rec.dump() << "\n";
    return 2;
  }
}

}  // namespace pesat
