#pragma once

// Scenario runs behind `carnot run`: build the problem described by a config,
// solve it, audit the asserted invariants and write the artifacts.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "carnot/grid.hpp"
#include "config.hpp"
#include "json.hpp"

namespace carnot::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int { kPass = 0, kInvariantFailure = 1, kNotConverged = 2, kConfigError = 64 };

// Worst of several codes: config error, then invariant failure, then non-convergence.
int combine_exit(int a, int b);

struct ScenarioResult {
  std::string name;
  std::string kind;
  int exit_code = kPass;
  std::string verdict;  // pass | invariant failure | not converged | config error
  std::vector<std::string> failed;  // names of failed checks
  nlohmann::json report;
  std::vector<std::pair<std::string, Field>> fields;  // dumped as <name>.csv + <name>.json
};

// Never throws for solver trouble; config-level problems found while building
// the run (e.g. an invalid damping) come back as kConfigError.
ScenarioResult run_scenario(const Config& config);

// Human-readable digest of a result.
std::string summary_text(const ScenarioResult& r);

// report.json, summary.txt and fields/ under dir. Returns the written paths.
std::vector<std::filesystem::path> write_scenario(const ScenarioResult& r, const std::filesystem::path& dir,
                                                  bool dump_fields);

// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

// {path relative to root, bytes, fnv1a} for each file, sorted by path.
nlohmann::json file_entries(const std::filesystem::path& root, const std::vector<std::filesystem::path>& files);

}  // namespace carnot::cli
