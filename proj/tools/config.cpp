#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace carnot::cli {

const std::vector<SchemaKey>& schema() {
  static const std::vector<SchemaKey> keys = {
      {"scenario", "kind", "choice", "", "what to run (required)", {"heat", "fp", "hj", "duality", "mfg", "metric"}},
      {"scenario", "name", "string", "", "run name used for the output directory; defaults to the kind", {}},
      {"run", "seed", "int", "1", "seed for every random stream (particles, random samples)", {}},
      {"group", "preset", "choice", "heisenberg1", "group law", {"heisenberg1"}},
      {"grid", "nodes", "int", "41", "nodes per axis of the cube grid", {}},
      {"grid", "lower", "real", "-2", "lower corner of the cube", {}},
      {"grid", "upper", "real", "2", "upper corner of the cube", {}},
      {"solver", "sigma", "real", "0.25", "diffusion coefficient", {}},
      {"solver", "gamma", "real", "2", "Hamiltonian exponent (>= 2)", {}},
      {"solver", "horizon", "real", "0.5", "final time T", {}},
      {"solver", "dt", "real", "0", "time step; 0 derives it from the stability bound", {}},
      {"solver", "cfl_safety", "real", "0.5", "fraction of the stable step", {}},
      {"solver", "radius", "real", "1.8", "radius of the truncation ball B_R", {}},
      {"heat", "data", "choice", "box", "initial datum: box indicator or gauge bump", {"box", "bump"}},
      {"heat", "half_width", "real", "0.5", "half-width of the box indicator, or bump radius", {}},
      {"heat", "samples", "int", "12", "log-spaced sampling times for the gradient decay fit", {}},
      {"fp", "rho_radius", "real", "0.6", "radius of the initial probability bump", {}},
      {"fp", "drift1", "real", "0", "constant drift, first component", {}},
      {"fp", "drift2", "real", "0", "constant drift, second component", {}},
      {"fp", "larger_radius", "real", "2.2", "second radius for the R-monotonicity check; 0 skips it", {}},
      {"fp", "particles", "int", "0", "particle oracle size; 0 skips it", {}},
      {"fp", "particle_jobs", "int", "1", "worker threads of the particle oracle", {}},
      {"fp", "particle_dt", "real", "0.0025", "Euler-Maruyama step", {}},
      {"hj", "u_radius", "real", "1", "radius of the bump datum u0", {}},
      {"hj", "u_height", "real", "1", "height of the bump datum u0", {}},
      {"hj", "source_radius", "real", "0.9", "radius of the bump source F", {}},
      {"hj", "source_height", "real", "0.5", "height of the bump source F; 0 for F = 0", {}},
      {"duality", "mu_radius", "real", "0.7", "radius of the terminal probability bump mu_tau", {}},
      {"duality", "s", "real", "0", "start of the duality window", {}},
      {"duality", "tau", "real", "0", "end of the duality window; 0 means the horizon", {}},
      {"mfg", "theta", "real", "0.5", "damping of the Picard iteration, in (0, 1]", {}},
      {"mfg", "tol_u", "real", "1e-5", "stop tolerance on sup |T(u) - u|", {}},
      {"mfg", "tol_rho", "real", "1e-4", "stop tolerance on the d0 change of rho", {}},
      {"mfg", "max_iterations", "int", "50", "Picard iteration limit", {}},
      {"mfg", "max_levels", "int", "256", "time levels of u kept in memory", {}},
      {"mfg", "eps", "real", "0.4", "mollifier radius of the coupling (>= 3h)", {}},
      {"mfg", "gain", "real", "1", "coupling gain lambda_F", {}},
      {"mfg", "u_radius", "real", "1", "radius of the terminal bump u_T", {}},
      {"mfg", "u_height", "real", "0.5", "height of the terminal bump u_T", {}},
      {"mfg", "rho_radius", "real", "0.5", "radius of the initial probability bump", {}},
      {"metric", "radius", "real", "0.5", "radius of both probability bumps", {}},
      {"metric", "shift1", "real", "0.4", "group translation of the second bump, x1", {}},
      {"metric", "shift2", "real", "0", "group translation of the second bump, x2", {}},
      {"metric", "shift3", "real", "0", "group translation of the second bump, x3", {}},
      {"output", "dump_fields", "bool", "true", "write final fields as CSV + JSON sidecar", {}},
  };
  return keys;
}

std::string schema_markdown() {
  std::ostringstream os;
  os << "# Scenario config reference\n\n"
     << "INI format: `[section]` headers, `key = value` lines, `;` or `#` comments.\n"
     << "Keys not listed here are rejected. Values can be overridden with `--set section.key=value`.\n";
  std::string section;
  for (const auto& k : schema()) {
    if (k.section != section) {
      section = k.section;
      os << "\n## [" << section << "]\n\n| key | type | default | description |\n|---|---|---|---|\n";
    }
    std::string type = k.type;
    if (!k.choices.empty()) {
      type = "one of ";
      for (std::size_t i = 0; i < k.choices.size(); ++i) type += (i ? ", " : "") + k.choices[i];
    }
    os << "| " << k.name << " | " << type << " | " << (k.default_value.empty() ? "-" : k.default_value) << " | "
       << k.description << " |\n";
  }
  return os.str();
}

namespace {

const SchemaKey* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : schema())
    if (k.section == section && k.name == name) return &k;
  return nullptr;
}

bool known_section(const std::string& section) {
  return std::any_of(schema().begin(), schema().end(), [&](const SchemaKey& k) { return k.section == section; });
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

void check_value(const SchemaKey& k, const std::string& v, int line) {
  const std::string where = k.path() + " = '" + v + "'";
  if (k.type == "int") {
    long long x;
    if (!parse_number(v, x)) throw ConfigError("expected an integer for " + where, line);
  } else if (k.type == "real") {
    double x;
    if (!parse_number(v, x) || !std::isfinite(x)) throw ConfigError("expected a finite real for " + where, line);
  } else if (k.type == "bool") {
    if (v != "true" && v != "false") throw ConfigError("expected true or false for " + where, line);
  } else if (k.type == "choice") {
    if (std::find(k.choices.begin(), k.choices.end(), v) == k.choices.end())
      throw ConfigError("unknown value for " + where, line);
  }
}

// Line of each section.key in the raw text (the ptree does not keep them).
std::map<std::string, int> line_index(const std::string& text) {
  std::map<std::string, int> idx;
  std::istringstream is(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto s = trim(raw);
    if (s.empty() || s[0] == ';' || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') {
      section = trim(s.substr(1, s.size() - 2));
      idx.emplace("[" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq != std::string::npos) idx.emplace(section + "." + trim(s.substr(0, eq)), line);
  }
  return idx;
}

}  // namespace

void Config::assign(const std::string& section, const std::string& key, const std::string& value, int line) {
  if (!known_section(section)) throw ConfigError("unknown section [" + section + "]", line);
  const SchemaKey* k = find_key(section, key);
  if (!k) throw ConfigError("unknown key '" + key + "' in section [" + section + "]", line);
  check_value(*k, value, line);
  values_[k->path()] = value;
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  for (const auto& k : schema()) c.values_[k.path()] = k.default_value;

  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.message(), static_cast<int>(e.line()));
  }
  const auto lines = line_index(text);
  auto line_of = [&](const std::string& key) {
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("key '" + section + "' outside any section", line_of("." + section));
    if (!known_section(section)) throw ConfigError("unknown section [" + section + "]", line_of("[" + section + "]"));
    for (const auto& [key, leaf] : body)
      c.assign(section, key, trim(leaf.get_value<std::string>()), line_of(section + "." + key));
  }
  if (c.values_.at("scenario.kind").empty())
    throw ConfigError("missing required key scenario.kind", line_of("[scenario]"));
  if (c.values_.at("scenario.name").empty()) c.values_["scenario.name"] = c.values_.at("scenario.kind");
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str(), path.string());
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  assign(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
         trim(assignment.substr(eq + 1)), 0);
  if (values_.at("scenario.name").empty()) values_["scenario.name"] = values_.at("scenario.kind");
}

const std::string& Config::str(const std::string& path) const {
  const auto it = values_.find(path);
  if (it == values_.end()) throw std::logic_error("Config: no key " + path);
  return it->second;
}

double Config::real(const std::string& path) const {
  double x = 0.0;
  parse_number(str(path), x);
  return x;
}

int Config::integer(const std::string& path) const {
  int x = 0;
  parse_number(str(path), x);
  return x;
}

bool Config::boolean(const std::string& path) const { return str(path) == "true"; }

nlohmann::json Config::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

}  // namespace carnot::cli
