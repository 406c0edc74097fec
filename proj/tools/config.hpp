#pragma once

// Scenario configs: INI text with sections, validated against a fixed schema.
// Every key has a documented default; unknown sections, unknown keys and
// malformed values are reported with their line number.

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace carnot::cli {

struct SchemaKey {
  std::string section;
  std::string name;
  std::string type;  // int | real | bool | string | choice
  std::string default_value;
  std::string description;
  std::vector<std::string> choices;

  std::string path() const { return section + "." + name; }
};

const std::vector<SchemaKey>& schema();
// Markdown reference generated from schema().
std::string schema_markdown();

struct ConfigError : std::runtime_error {
  int line = 0;  // 0 when not tied to a line
  ConfigError(const std::string& what, int line_ = 0) : std::runtime_error(what), line(line_) {}
};

class Config {
 public:
  // Parses and validates; throws ConfigError.
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::filesystem::path& path);

  // section.key=value, validated like a config line.
  void set(const std::string& assignment);

  const std::string& str(const std::string& path) const;
  double real(const std::string& path) const;
  int integer(const std::string& path) const;
  bool boolean(const std::string& path) const;

  // Every key with its effective value, sorted.
  nlohmann::json to_json() const;
  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  void assign(const std::string& section, const std::string& key, const std::string& value, int line);
};

}  // namespace carnot::cli
