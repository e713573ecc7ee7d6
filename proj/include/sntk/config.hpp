#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sntk {

/// Bad configuration: unknown key, malformed value, failed precondition.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// One recognised key of a command, with its default rendered as text.
struct ParamSpec {
  std::string key;
  std::string default_value;
  std::string help;
};

/// `key = value` settings.  Keys are stored in flag spelling (dashes), so
/// `g_min` and `g-min` name the same entry.  Values keep their original text,
/// which makes a written-back config reproduce a run exactly.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;

  /// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
  static ExperimentConfig parse(std::istream& is, const std::string& source = "<config>");
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Defaults for every spec, then `overrides` on top.  Keys absent from
  /// `specs` raise ConfigError.
  static ExperimentConfig resolve(const std::vector<ParamSpec>& specs, const ExperimentConfig& overrides);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  /// Whitespace- or comma-separated numbers.
  std::vector<double> get_doubles(const std::string& key) const;

  /// Later entries win.
  void merge(const ExperimentConfig& other);

  void write(std::ostream& os) const;
  void save(const std::filesystem::path& path) const;

  static std::string normalize_key(std::string key);

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace sntk
