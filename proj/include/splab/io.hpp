#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace splab {

/// Flat key=value configuration. '#' starts a comment; blank lines are ignored.
/// Later assignments win, so command-line overrides are applied with set().
class RunConfig {
 public:
  static RunConfig defaults();
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig parse(std::string_view text, const std::string& origin = "<text>");

  void set(const std::string& key, const std::string& value);
  void set_assignment(const std::string& key_eq_value);  // "key=value"
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  /// Checks every known key against its precondition; throws ConfigError naming the field.
  void validate() const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }
  /// Sorted key=value lines, the canonical form hashed into manifests.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> values_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t h);

/// Float64 in CSV form: 17 significant digits.
std::string format_double(double x);

struct CsvTable {
  std::string schema;  // name@semver
  std::vector<std::string> comments;  // extra '# key=value' lines after the schema line
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Reads a CSV written by write_csv; throws DomainError when the schema line is
/// missing or names a different schema than `expected_schema` (name only, any version).
CsvTable read_csv(const std::filesystem::path& path, const std::string& expected_schema);

inline constexpr const char* kBranchSchema = "branch@1.0.0";
inline constexpr const char* kProfileSchema = "profile@1.0.0";
inline constexpr const char* kSpectrumSchema = "spectrum@1.0.0";
inline constexpr const char* kTraceSchema = "trace@1.0.0";
inline constexpr const char* kSnapshotSchema = "snapshots@1.0.0";
inline constexpr const char* kLinearSchema = "linear@1.0.0";
inline constexpr const char* kSlopeSchema = "slope@1.0.0";
inline constexpr const char* kTransitionSchema = "transition@1.0.0";
inline constexpr const char* kRescaleSchema = "rescale@1.0.0";
inline constexpr const char* kManifestSchema = "manifest@1.0.0";

/// Manifest with the verbatim configuration, its hash, and caller-provided sections.
nlohmann::json make_manifest(const std::string& id, const std::string& subcommand, const RunConfig& config);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace splab
