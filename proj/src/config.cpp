#include "sntk/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace sntk {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string ExperimentConfig::normalize_key(std::string key) {
  key = trim(key);
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

ExperimentConfig ExperimentConfig::parse(std::istream& is, const std::string& source) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = normalize_key(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  return parse(is, path.string());
}

ExperimentConfig ExperimentConfig::resolve(const std::vector<ParamSpec>& specs, const ExperimentConfig& overrides) {
  ExperimentConfig out;
  std::set<std::string> known;
  for (const auto& s : specs) {
    known.insert(s.key);
    out.values_[s.key] = s.default_value;
  }
  for (const auto& [key, value] : overrides.values_) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    out.values_[key] = value;
  }
  return out;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  values_[normalize_key(key)] = trim(value);
}

bool ExperimentConfig::has(const std::string& key) const { return values_.count(normalize_key(key)) > 0; }

std::string ExperimentConfig::get_string(const std::string& key) const {
  const auto it = values_.find(normalize_key(key));
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
  const std::string text = get_string(key);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v))
    throw ConfigError("'" + key + "' expects a finite number, got '" + text + "'");
  return v;
}

int ExperimentConfig::get_int(const std::string& key) const {
  const std::string text = get_string(key);
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("'" + key + "' expects an integer, got '" + text + "'");
  return v;
}

std::uint64_t ExperimentConfig::get_seed(const std::string& key) const {
  const std::string text = get_string(key);
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + text + "'");
  return v;
}

bool ExperimentConfig::get_bool(const std::string& key) const {
  const std::string text = get_string(key);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("'" + key + "' expects true/false, got '" + text + "'");
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key) const {
  std::string text = get_string(key);
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream is(text);
  std::vector<double> out;
  std::string token;
  while (is >> token) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size() || !std::isfinite(v))
      throw ConfigError("'" + key + "' expects a list of numbers, got '" + get_string(key) + "'");
    out.push_back(v);
  }
  return out;
}

void ExperimentConfig::merge(const ExperimentConfig& other) {
  for (const auto& [key, value] : other.values_) values_[key] = value;
}

void ExperimentConfig::write(std::ostream& os) const {
  for (const auto& [key, value] : values_) os << key << " = " << value << "\n";
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write(os);
}

}  // namespace sntk
