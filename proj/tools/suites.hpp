#pragma once

// Named acceptance suites, one per criterion, run by `carnot verify` and by
// the acceptance test binary.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace carnot::cli {

struct SuiteOptions {
  std::uint64_t seed = 1;
  int jobs = 4;                      // worker threads for the parallel particle oracle
  std::filesystem::path scratch;     // working directory for repeated runs
};

struct SuiteResult {
  int id = 0;
  std::string name;
  bool pass = false;
  nlohmann::json detail;  // every measured quantity with its bound
  double seconds = 0.0;
};

struct SuiteInfo {
  int id;
  std::string name;
  std::string description;
  std::function<SuiteResult(const SuiteOptions&)> run;
};

const std::vector<SuiteInfo>& suites();
// By name or by number; nullptr when unknown.
const SuiteInfo* find_suite(const std::string& key);
// Runs one suite, timing it and turning an exception into a failure.
SuiteResult run_suite(const SuiteInfo& s, const SuiteOptions& opt);

}  // namespace carnot::cli
