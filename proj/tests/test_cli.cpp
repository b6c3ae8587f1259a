#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pesat/config.hpp"
#include "pesat/experiments.hpp"
#include "pesat/operators.hpp"
#include "pesat/seeds.hpp"

using namespace pesat;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pesat_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + PESAT_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
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

const char* kShortRun = "[experiment]\nduration = 0.125\nu0 = 0.2*phi1 + 0.1*psi2\n[noise]\nseed = 4\n";

}  // namespace

TEST_CASE("state expressions parse to exact states") {
  const RState u = parse_state("0.5*phi1 + 1/3*psi2 - 2e-1*theta_s_1_0_2");
  RState expect;
  expect.theta = Rational(1, 2) * phi<Rational>(1) - Rational(1, 5) * sm<Rational>(1, 0, 2, Phase::S);
  expect.v = Rational(1, 3) * psi_field<Rational>(2);
  CHECK(u == expect);
  CHECK(parse_state("zero").empty());
  CHECK(parse_state("phitilde2").v == phi_tilde<Rational>(2));
  CHECK(parse_state("qphi2").v == q1_theta(phi<Rational>(2)));
  CHECK(parse_state("theta_c_0_1_1").theta == phi<Rational>(3));
  for (const char* bad : {"phi11", "2*", "theta_x_1_0_1", "phi1 +", "foo"}) {
    INFO(bad);
    CHECK(error_kind([&] { parse_state(bad); }) == ErrorKind::ConfigError);
  }
}

TEST_CASE("configuration schema, validation and hashing") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.get_int("truncation", "M") == 2);
  CHECK(cfg.get_doubles("experiment", "deltas") == std::vector<double>{0.1, 0.01, 0.001});
  CHECK(cfg.get_items("experiment", "targets").size() == 4);
  const std::uint64_t h = cfg.hash();
  cfg.set("physics", "f", "2");
  CHECK(cfg.hash() != h);
  CHECK(RunConfig::from_map(cfg.flat()).canonical() == cfg.canonical());
  CHECK(error_kind([&] { cfg.set("physics", "bogus", "1"); }) == ErrorKind::ConfigError);
  cfg.set("time", "dt", "-1");
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    CHECK(std::string(e.what()).find("time.dt") != std::string::npos);
  }
  CHECK(error_kind([] { RunConfig::from_string("[physics]\nbogus = 1\n"); }) == ErrorKind::ConfigError);
  CHECK(error_kind([] { RunConfig::from_string("[nowhere]\nx = 1\n"); }) == ErrorKind::ConfigError);
  CHECK(RunConfig::from_string("[truncation]\nM = 3\n").get_int("truncation", "M") == 3);
}

TEST_CASE("environment overrides use the PESAT_ prefix") {
  RunConfig cfg;
  std::string a = "PESAT_PHYSICS_NU1=0.5", b = "PESAT_NOISE_Q=3", c = "HOME=/root";
  char* env[] = {a.data(), b.data(), c.data(), nullptr};
  cfg.apply_env(env);
  CHECK(cfg.get_double("physics", "nu1") == 0.5);
  CHECK(cfg.get_double("noise", "q") == 3);
  std::string d = "PESAT_PHYSICS_BOGUS=1";
  char* bad[] = {d.data(), nullptr};
  CHECK(error_kind([&] { cfg.apply_env(bad); }) == ErrorKind::ConfigError);
}

TEST_CASE("identity report exits cleanly") {
  const fs::path out = scratch("identities");
  CHECK(run("verify-identities --out " + out.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(out / "identities.json"));
  CHECK(j["passed"] == j["total"]);
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(m["subcommand"] == "verify-identities");
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  CHECK(m.contains("versions"));
}

TEST_CASE("malformed configuration exits with code 2 naming the key") {
  const fs::path dir = scratch("malformed");
  write(dir / "bad.ini", "[physics]\nbogus = 1\n");
  CHECK(run("simulate --config " + (dir / "bad.ini").string() + " --out " + (dir / "o").string()) == 2);
  write(dir / "range.ini", "[time]\ndt = -1\n");
  CHECK(run("simulate --config " + (dir / "range.ini").string() + " --out " + (dir / "o").string()) == 2);
  const auto err = nlohmann::json::parse(slurp(dir / "o" / "error.json"));
  CHECK(err["exit_code"] == 2);
  CHECK(err["message"].get<std::string>().find("time.dt") != std::string::npos);
  CHECK(run("simulate --out " + (dir / "e").string(), "PESAT_PHYSICS_BOGUS=1") == 2);
  CHECK(run("simulate --no-such-flag") == 2);
}

TEST_CASE("same configuration and seed give byte-identical outputs") {
  const fs::path dir = scratch("determinism");
  write(dir / "run.ini", kShortRun);
  const std::string cfg = " --config " + (dir / "run.ini").string();
  REQUIRE(run("simulate" + cfg + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run("simulate" + cfg + " --out " + (dir / "b").string()) == 0);
  for (const char* f : {"trajectory.csv", "energy.csv", "final_state.json"}) {
    INFO(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK_FALSE(slurp(dir / "a" / f).empty());
  }
  CHECK(slurp(dir / "a" / "manifest.json") == slurp(dir / "b" / "manifest.json"));
}

TEST_CASE("a manifest alone reproduces its run") {
  const fs::path dir = scratch("replay");
  write(dir / "run.ini", kShortRun);
  REQUIRE(run("simulate --config " + (dir / "run.ini").string() + " --out " + (dir / "a").string(),
              "PESAT_PHYSICS_F=2") == 0);
  REQUIRE(run("replay --manifest " + (dir / "a" / "manifest.json").string() + " --out " + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
  const auto m = nlohmann::json::parse(slurp(dir / "b" / "manifest.json"));
  CHECK(m["config"]["physics.f"] == "2");
  CHECK(m["config"]["noise.seed"] == "4");
}

TEST_CASE("seed flag overrides the configured seed") {
  const fs::path dir = scratch("seed");
  REQUIRE(run("verify-identities --seed 17 --out " + dir.string()) == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m["seed"] == 17);
  CHECK(m["config"]["noise.seed"] == "17");
}

TEST_CASE("experiment failures exit with code 1") {
  const fs::path dir = scratch("failure");
  write(dir / "run.ini", "[experiment]\nT = 0.001\ntargets = 0.1*theta_s_1_0_2\n");
  CHECK(run("steer --config " + (dir / "run.ini").string() + " --out " + (dir / "o").string()) == 1);
  const auto err = nlohmann::json::parse(slurp(dir / "o" / "error.json"));
  CHECK(err["exit_code"] == 1);
}
