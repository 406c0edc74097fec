// One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.
// Optional arguments select suites by name or number.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "suites.hpp"

using namespace carnot::cli;

int main(int argc, char** argv) {
  std::vector<const SuiteInfo*> selected;
  for (int i = 1; i < argc; ++i) {
    const auto* s = find_suite(argv[i]);
    if (!s) {
      std::cerr << "unknown suite " << argv[i] << "\n";
      return 64;
    }
    selected.push_back(s);
  }
  if (selected.empty())
    for (const auto& s : suites()) selected.push_back(&s);

  SuiteOptions opt;
  opt.scratch = std::filesystem::temp_directory_path() / fmt::format("carnot-acceptance-{}", ::getpid());
  int failures = 0;
  for (const auto* s : selected) {
    const auto r = run_suite(*s, opt);
    std::cout << fmt::format("{} criterion {:>2} {:<16} ({:.1f} s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name, r.seconds);
    for (const auto& [name, c] : r.detail.items())
      if (c.is_object() && c.contains("pass"))
        std::cout << fmt::format("       {} {:<34} value {}  bound {}\n", c["pass"].get<bool>() ? "ok  " : "FAIL", name,
                                 c["value"].is_object() || c["value"].is_array() ? c["value"].dump().substr(0, 120)
                                                                                 : c["value"].dump(),
                                 c["bound"].dump());
    if (r.detail.contains("error")) std::cout << "       error: " << r.detail["error"].get<std::string>() << "\n";
    std::cout << std::flush;
    failures += r.pass ? 0 : 1;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", selected.size() - failures, selected.size());
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
