// Command line front end: pesat <subcommand> --config PATH --seed N --out DIR --threads N

#include <iostream>

#include <CLI11.hpp>

#include "pesat/experiments.hpp"

extern char** environ;

int main(int argc, char** argv) {
  CLI::App app{"Truncated primitive-equation control and mixing laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pesat::kVersion);

  std::string config_path, out_dir = "out", manifest_path;
  long long seed = -1;
  int threads = 1;
  for (const auto& name : pesat::subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI configuration file");
    sub->add_option("--seed", seed, "noise seed; overrides noise.seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads");
  }
  CLI::App* replay = app.add_subcommand("replay", "re-run from a manifest");
  replay->add_option("--manifest", manifest_path)->required();
  replay->add_option("--out", out_dir, "output directory");
  replay->add_option("--threads", threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << pesat::error_record(pesat::ErrorKind::ConfigError, e.what(), 2).dump() << "\n";
    return 2;
  }

  if (replay->parsed()) return pesat::replay_manifest(manifest_path, out_dir, threads, std::cout, std::cerr);

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    pesat::RunConfig cfg = config_path.empty() ? pesat::RunConfig() : pesat::RunConfig::from_file(config_path);
    cfg.apply_env(environ);
    if (seed >= 0) cfg.set("noise", "seed", std::to_string(seed));
    return pesat::run_subcommand(sub, cfg, out_dir, threads, std::cout, std::cerr);
  } catch (const pesat::Error& e) {
    std::cerr << pesat::error_record(e.kind(), e.what(), 2).dump() << "\n";
    return 2;
  }
}
