#pragma once

// Subcommand runners: each writes JSON/CSV artifacts and a manifest into an
// output directory and maps module errors to exit codes.

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pesat/config.hpp"

namespace pesat {

inline constexpr const char* kVersion = "0.1.0";

const std::vector<std::string>& subcommands();

/// Exit codes: 0 success, 1 experiment failure, 2 configuration error. On
/// failure an error record goes to out_dir/error.json and to `err`.
int run_subcommand(const std::string& sub, const RunConfig& cfg, const std::string& out_dir, int threads,
                   std::ostream& log, std::ostream& err);

/// Re-runs the subcommand and configuration stored in a manifest.
int replay_manifest(const std::string& manifest_path, const std::string& out_dir, int threads, std::ostream& log,
                    std::ostream& err);

nlohmann::json manifest(const std::string& sub, const RunConfig& cfg, int threads,
                        const std::vector<std::string>& outputs);

nlohmann::json error_record(ErrorKind kind, const std::string& message, int exit_code);

}  // namespace pesat
