#include "splab/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "splab/errors.hpp"

namespace splab {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> d = {
      {"potential", "smoothed"},
      {"Z", "1"},
      {"potential_table", ""},
      {"n", "2000"},
      {"r_max", "100"},
      {"n_refine", "4000"},
      {"linear_states", "4"},
      {"branches", "0,1,2,3"},
      {"branch", "0"},
      {"transition_branch", "1"},
      {"profiles", "ends"},
      {"gamma_step", "0.05"},
      {"gamma_min_step", "0.0125"},
      {"target_mass", "1"},
      {"bvp_tol", "1e-10"},
      {"per_decade", "25"},
      {"E_max", "0"},
      {"min_gap", "1e-3"},
      {"E", "1"},
      {"full_jl", "true"},
      {"transition_E_from", "0.05"},
      {"transition_E_to", "0.16"},
      {"transition_E_step", "0.01"},
      {"transition_tol", "0.0025"},
      {"rescale_E_max", "1000"},
      {"evo_n", "8000"},
      {"evo_r_max", "400"},
      {"dt", "0.005"},
      {"t_final", "50"},
      {"eps", "1e-4"},
      {"evo_E", "1"},
      {"ic", "strang"},
      {"snapshot_stride", "100"},
      {"trace_stride", "10"},
      {"paper_scale", "false"},
      {"C_HLS", "2.2940"},
      {"C_GN", "0.42705"},
      {"out_dir", "out"},
      {"jobs", "1"},
      {"id", ""},
  };
  return d;
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.values_ = default_values();
  return c;
}

RunConfig RunConfig::parse(std::string_view text, const std::string& origin) {
  RunConfig c = defaults();
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value, got '" + t + "'");
    c.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!default_values().count(key)) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

void RunConfig::set_assignment(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + kv + "'");
  set(trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
}

std::string RunConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected a finite number, got '" + s + "'");
  }
}

long RunConfig::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field '" + key + "': expected an integer, got '" + s + "'");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string s = get_string(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("field '" + key + "': expected true/false, got '" + s + "'");
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : split(get_string(key), ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      const int v = std::stoi(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("field '" + key + "': expected a comma-separated integer list, got '" + get_string(key) + "'");
    }
  }
  return out;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError("field '" + field + "': " + msg);
  };
  const std::string pot = get_string("potential");
  require(pot == "smoothed" || pot == "coulomb-table" || pot == "table" || pot == "zero", "potential",
          "must be one of smoothed, coulomb-table, table, zero");
  if (pot == "table") require(!get_string("potential_table").empty(), "potential_table", "required for potential=table");
  require(get_double("Z") > 0.0, "Z", "charge must be > 0");
  for (const char* k : {"n", "n_refine", "evo_n"})
    require(get_int(k) >= 2, k, "element count n must be >= 2");
  for (const char* k : {"r_max", "evo_r_max"}) require(get_double(k) > 0.0, k, "radius must be > 0");
  require(get_int("linear_states") >= 1, "linear_states", "must be >= 1");
  for (int b : get_int_list("branches")) require(b >= 0, "branches", "branch indices must be >= 0");
  require(!get_int_list("branches").empty(), "branches", "at least one branch index required");
  require(get_int("branch") >= 0, "branch", "must be >= 0");
  require(get_int("transition_branch") >= 0, "transition_branch", "must be >= 0");
  const std::string profiles = get_string("profiles");
  require(profiles == "ends" || profiles == "all", "profiles", "must be ends or all");
  const double step = get_double("gamma_step");
  require(step > 0.0 && step <= 0.2, "gamma_step", "must lie in (0, 0.2]");
  const double min_step = get_double("gamma_min_step");
  require(min_step > 0.0 && min_step <= step, "gamma_min_step", "must lie in (0, gamma_step]");
  require(get_double("target_mass") > 0.0, "target_mass", "must be > 0");
  require(get_double("bvp_tol") > 0.0, "bvp_tol", "must be > 0");
  require(get_int("per_decade") >= 1, "per_decade", "must be >= 1");
  require(get_double("E_max") >= 0.0, "E_max", "must be >= 0 (0 selects the default range)");
  require(get_double("min_gap") > 0.0, "min_gap", "must be > 0");
  require(get_double("E") > 0.0, "E", "must be > 0");
  get_bool("full_jl");
  get_bool("paper_scale");
  const double a = get_double("transition_E_from"), b = get_double("transition_E_to");
  require(a > 0.0 && b > a, "transition_E_to", "transition range must satisfy 0 < from < to");
  require(get_double("transition_E_step") > 0.0, "transition_E_step", "must be > 0");
  require(get_double("transition_tol") > 0.0, "transition_tol", "must be > 0");
  require(get_double("rescale_E_max") > 0.0, "rescale_E_max", "must be > 0");
  require(get_double("dt") > 0.0, "dt", "time step must be > 0");
  require(get_double("t_final") > 0.0, "t_final", "must be > 0");
  require(get_double("eps") >= 0.0, "eps", "perturbation amplitude must be >= 0");
  require(get_double("evo_E") > 0.0, "evo_E", "must be > 0");
  const std::string ic = get_string("ic");
  require(ic == "strang" || ic == "semidiscrete", "ic", "must be strang or semidiscrete");
  require(get_int("snapshot_stride") >= 1, "snapshot_stride", "must be >= 1");
  require(get_int("trace_stride") >= 1, "trace_stride", "must be >= 1");
  require(get_double("C_HLS") > 0.0, "C_HLS", "must be > 0");
  require(get_double("C_GN") > 0.0, "C_GN", "must be > 0");
  require(!get_string("out_dir").empty(), "out_dir", "must not be empty");
  require(get_int("jobs") >= 1, "jobs", "must be >= 1");
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) { return fmt::format("{:016x}", h); }

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size())
    throw DomainError("CSV row has " + std::to_string(row.size()) + " fields, expected " +
                      std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "# schema=" << table.schema << "\n";
  for (const auto& c : table.comments) out << "# " << c << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw Error("failed writing " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path, const std::string& expected_schema) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# schema=", 0) != 0)
    throw DomainError(path.string() + ": missing schema header");
  t.schema = line.substr(9);
  const auto name = [](const std::string& s) { return s.substr(0, s.find('@')); };
  if (name(t.schema) != name(expected_schema))
    throw DomainError(path.string() + ": schema '" + t.schema + "' does not match '" + expected_schema + "'");
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      t.comments.push_back(line.substr(2));
      continue;
    }
    if (!have_header) {
      t.columns = split(line, ',');
      have_header = true;
    } else {
      t.rows.push_back(split(line, ','));
    }
  }
  if (!have_header) throw DomainError(path.string() + ": missing column header");
  return t;
}

nlohmann::json make_manifest(const std::string& id, const std::string& subcommand, const RunConfig& config) {
  nlohmann::json j;
  j["schema"] = kManifestSchema;
  j["id"] = id;
  j["subcommand"] = subcommand;
  j["config"] = config.values();
  j["config_hash"] = hex64(fnv1a64(config.canonical()));
  const auto now = std::chrono::system_clock::now();
  j["timestamp_unix"] = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace splab
