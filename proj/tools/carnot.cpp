// carnot: batch front-end for scenario runs and acceptance suites.
//
//   carnot run <cfg>... [--set section.key=value]... [--seed N] [--jobs N] [--output-dir DIR]
//   carnot verify <suite|number|all> [--seed N] [--jobs N] [--output-dir DIR]
//   carnot schema [--output FILE]
//
// Outputs go to <output-dir>/<label>_YYYYmmdd-HHMMSS/ with a manifest.json.
// The output dir defaults to $CARNOT_OUTPUT_DIR, then ./carnot-runs.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "config.hpp"
#include "scenario.hpp"
#include "suites.hpp"

namespace fs = std::filesystem;
using namespace carnot::cli;

namespace {

fs::path output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CARNOT_OUTPUT_DIR"); env && *env) return env;
  return "carnot-runs";
}

// <root>/<label>_YYYYmmdd-HHMMSS, suffixed when it already exists.
fs::path invocation_dir(const fs::path& root, const std::string& label) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  fs::path dir = root / fmt::format("{}_{}", label, stamp);
  for (int k = 1; fs::exists(dir); ++k) dir = root / fmt::format("{}_{}-{}", label, stamp, k);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

int cmd_run(const std::vector<std::string>& paths, const std::vector<std::string>& sets, std::optional<long> seed,
            int jobs, const std::string& outdir) {
  std::vector<Config> configs;
  for (const auto& p : paths) {
    try {
      auto c = Config::load(p);
      for (const auto& s : sets) c.set(s);
      if (seed) c.set(fmt::format("run.seed={}", *seed));
      configs.push_back(std::move(c));
    } catch (const ConfigError& e) {
      if (e.line > 0) spdlog::error("{}:{}: {}", p, e.line, e.what());
      else spdlog::error("{}: {}", p, e.what());
      return kConfigError;
    }
  }

  // distinct subdirectory names
  std::vector<std::string> names;
  for (const auto& c : configs) {
    std::string n = c.str("scenario.name");
    for (int k = 2; std::find(names.begin(), names.end(), n) != names.end(); ++k)
      n = fmt::format("{}-{}", c.str("scenario.name"), k);
    names.push_back(n);
  }
  const fs::path dir = invocation_dir(output_root(outdir), configs.size() == 1 ? names.front() : "run");
  spdlog::info("output directory {}", dir.string());

  std::vector<ScenarioResult> results(configs.size());
  std::vector<nlohmann::json> files(configs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < configs.size();) {
      {
        std::lock_guard lock(log_mutex);
        spdlog::info("running {} ({})", names[i], configs[i].str("scenario.kind"));
      }
      const auto t0 = std::chrono::steady_clock::now();
      results[i] = run_scenario(configs[i]);
      const auto written = write_scenario(results[i], dir / names[i], configs[i].boolean("output.dump_fields"));
      files[i] = file_entries(dir, written);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::lock_guard lock(log_mutex);
      spdlog::info("{}: {} (exit {}) in {:.1f} s", names[i], results[i].verdict, results[i].exit_code, secs);
      for (const auto& f : results[i].failed) spdlog::warn("{}: check {} failed", names[i], f);
      if (results[i].report.contains("error"))
        spdlog::warn("{}: {}", names[i], results[i].report["error"].get<std::string>());
    }
  };
  const int threads = std::clamp<int>(jobs, 1, static_cast<int>(configs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kPass;
  nlohmann::json manifest = {{"command", "run"}, {"scenarios", nlohmann::json::array()}};
  for (std::size_t i = 0; i < configs.size(); ++i) {
    code = combine_exit(code, results[i].exit_code);
    manifest["scenarios"].push_back({{"name", names[i]},
                                     {"config", configs[i].origin()},
                                     {"kind", results[i].kind},
                                     {"verdict", results[i].verdict},
                                     {"exit_code", results[i].exit_code},
                                     {"files", files[i]}});
    std::cout << summary_text(results[i]);
  }
  manifest["exit_code"] = code;
  write_json(dir / "manifest.json", manifest);
  std::cout << "output: " << dir.string() << "\n";
  return code;
}

int cmd_verify(const std::string& which, std::optional<long> seed, int jobs, const std::string& outdir) {
  std::vector<const SuiteInfo*> selected;
  if (which == "all") {
    for (const auto& s : suites()) selected.push_back(&s);
  } else if (const auto* s = find_suite(which)) {
    selected.push_back(s);
  } else {
    spdlog::error("unknown suite '{}'", which);
    for (const auto& s : suites()) spdlog::info("  {:>2} {:<16} {}", s.id, s.name, s.description);
    return kConfigError;
  }
  const fs::path dir = invocation_dir(output_root(outdir), "verify-" + which);
  SuiteOptions opt;
  if (seed) opt.seed = static_cast<std::uint64_t>(*seed);
  opt.jobs = std::max(1, jobs);
  opt.scratch = dir / "scratch";

  int code = kPass;
  nlohmann::json report = nlohmann::json::array();
  for (const auto* s : selected) {
    spdlog::info("suite {} {}", s->id, s->name);
    const auto r = run_suite(*s, opt);
    std::cout << fmt::format("{} {:>2} {:<16} ({:.1f} s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name, r.seconds)
              << std::flush;
    if (!r.pass) {
      code = kInvariantFailure;
      for (const auto& [name, c] : r.detail.items())
        if (c.is_object() && c.contains("pass") && !c["pass"].get<bool>())
          spdlog::warn("  {} value {} bound {}", name, c["value"].dump(), c["bound"].dump());
      if (r.detail.contains("error")) spdlog::warn("  {}", r.detail["error"].dump());
    }
    report.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  }
  write_json(dir / "verify.json", report);
  write_json(dir / "manifest.json", {{"command", "verify"},
                                     {"suite", which},
                                     {"seed", opt.seed},
                                     {"exit_code", code},
                                     {"files", file_entries(dir, {dir / "verify.json"})}});
  std::cout << "output: " << dir.string() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("carnot"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Diffusion, Hamilton-Jacobi and mean-field game solvers on Carnot groups"};
  app.require_subcommand(1);
  std::string outdir;
  std::optional<long> seed;
  int jobs = 1;
  app.add_option("--output-dir", outdir, "root for output directories (overrides $CARNOT_OUTPUT_DIR)");
  app.add_option("--seed", seed, "seed for every random stream (overrides run.seed)");
  app.add_option("--jobs", jobs, "independent scenarios run in parallel; suite particle workers")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "run scenario configs");
  std::vector<std::string> paths, sets;
  run->add_option("configs", paths, "scenario config files")->required();
  run->add_option("--set", sets, "override a config value, section.key=value");

  auto* verify = app.add_subcommand("verify", "run an acceptance suite");
  std::string which;
  verify->add_option("suite", which, "suite name, number, or all")->required();

  auto* schema_cmd = app.add_subcommand("schema", "print the config reference");
  std::string schema_out;
  schema_cmd->add_option("--output", schema_out, "write to a file instead of stdout");

  // options are accepted before or after the subcommand
  for (auto* sub : {run, verify}) {
    sub->add_option("--output-dir", outdir, "root for output directories");
    sub->add_option("--seed", seed, "seed for every random stream");
    sub->add_option("--jobs", jobs, "parallel workers")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return cmd_run(paths, sets, seed, jobs, outdir);
    if (*verify) return cmd_verify(which, seed, jobs, outdir);
    if (schema_out.empty()) {
      std::cout << schema_markdown();
    } else {
      std::ofstream(schema_out) << schema_markdown();
    }
    return 0;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kInvariantFailure;
  }
}
