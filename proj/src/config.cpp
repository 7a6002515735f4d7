#include "chebcon/config.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace chebcon {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "paper_defaults", "N",          "graph",          "graph_seed",     "failure_rate",   "connectivity_window",
      "U",              "epsilon",    "K1",             "K2",             "noise_family",   "noise_location",
      "noise_scale",    "alpha",      "p",              "gamma",          "prior",          "prior_degree",
      "seed",           "oracle_grid", "max_rounds",    "objectives_a",   "objectives_b",   "constraints_lo",
      "constraints_hi"};
  return keys;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

ScenarioConfig from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a table of keys");
  for (const auto& [key, value] : j.items()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ScenarioConfig cfg;
  if (j.contains("paper_defaults") && get<bool>(j, "paper_defaults")) cfg = default_scenario();

  if (j.contains("N")) cfg.N = get<std::size_t>(j, "N");
  if (j.contains("graph")) cfg.graph = parse_graph_kind(get<std::string>(j, "graph"));
  if (j.contains("graph_seed")) cfg.graph_seed = get<std::uint64_t>(j, "graph_seed");
  if (j.contains("failure_rate")) cfg.failure_rate = get<double>(j, "failure_rate");
  if (j.contains("connectivity_window")) cfg.connectivity_window = get<std::size_t>(j, "connectivity_window");
  if (j.contains("U")) cfg.U = get<std::size_t>(j, "U");
  if (j.contains("epsilon")) cfg.epsilon = get<double>(j, "epsilon");
  if (j.contains("K1")) cfg.K1 = get<std::size_t>(j, "K1");
  if (j.contains("K2")) cfg.K2 = get<std::size_t>(j, "K2");
  if (j.contains("noise_family")) cfg.noise.family = parse_noise_family(get<std::string>(j, "noise_family"));
  if (j.contains("noise_location")) cfg.noise.location = get<double>(j, "noise_location");
  if (j.contains("noise_scale")) cfg.noise.scale = get<double>(j, "noise_scale");
  if (j.contains("alpha")) cfg.alpha = get<double>(j, "alpha");
  if (j.contains("p")) cfg.adversary.p = get<double>(j, "p");
  if (j.contains("gamma")) cfg.adversary.gamma = get<double>(j, "gamma");
  const std::size_t prior_degree = j.contains("prior_degree") ? get<std::size_t>(j, "prior_degree") : 20;
  const std::string prior = j.contains("prior") ? get<std::string>(j, "prior") : "point_mass";
  if (prior == "point_mass") {
    cfg.adversary.prior = DegreePrior::point_mass(prior_degree);
  } else if (prior == "doubling_uniform") {
    cfg.adversary.prior = DegreePrior::doubling_uniform(prior_degree);
  } else {
    throw ConfigError("unknown prior '" + prior + "'");
  }
  if (j.contains("seed")) cfg.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("oracle_grid")) cfg.oracle_grid = get<std::size_t>(j, "oracle_grid");
  if (j.contains("max_rounds")) cfg.max_rounds = get<std::size_t>(j, "max_rounds");

  if (j.contains("objectives_a") || j.contains("objectives_b")) {
    const auto a = get<std::vector<double>>(j, "objectives_a");
    const auto b = get<std::vector<double>>(j, "objectives_b");
    if (a.size() != b.size()) throw ConfigError("objectives_a and objectives_b differ in length");
    cfg.objectives.clear();
    for (std::size_t k = 0; k < a.size(); ++k) cfg.objectives.push_back({a[k], b[k]});
  }
  if (j.contains("constraints_lo") || j.contains("constraints_hi")) {
    const auto lo = get<std::vector<double>>(j, "constraints_lo");
    const auto hi = get<std::vector<double>>(j, "constraints_hi");
    if (lo.size() != hi.size()) throw ConfigError("constraints_lo and constraints_hi differ in length");
    cfg.constraints.clear();
    try {
      for (std::size_t k = 0; k < lo.size(); ++k) cfg.constraints.emplace_back(lo[k], hi[k]);
    } catch (const InvalidInterval& e) {
      throw ConfigError(e.what());
    }
  }
  cfg.validate();
  return cfg;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Drops a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"') quoted = !quoted;
    if (line[k] == '#' && !quoted) return line.substr(0, k);
  }
  return line;
}

// TOML scalars and arrays that are also JSON once bare words are mapped.
json toml_value(const std::string& raw, std::size_t line_no) {
  std::string v = trim(raw);
  std::string out;
  bool quoted = false;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] == '"') quoted = !quoted;
    // Digit separators as in 1_000_000.
    if (!quoted && v[k] == '_' && k > 0 && std::isdigit(static_cast<unsigned char>(v[k - 1]))) continue;
    out.push_back(v[k]);
  }
  try {
    return json::parse(out);
  } catch (const json::exception&) {
    throw ConfigError("cannot parse TOML value on line " + std::to_string(line_no) + ": " + v);
  }
}

}  // namespace

ScenarioConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  }
  return from_json(j);
}

ScenarioConfig parse_config_toml(const std::string& text) {
  json j = json::object();
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') throw ConfigError("TOML tables are not supported (line " + std::to_string(line_no) + ")");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value on line " + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("missing key on line " + std::to_string(line_no));
    if (j.contains(key)) throw ConfigError("duplicate key '" + key + "'");
    j[key] = toml_value(line.substr(eq + 1), line_no);
  }
  return from_json(j);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") return parse_config_json(buf.str());
  return parse_config_toml(buf.str());
}

}  // namespace chebcon
