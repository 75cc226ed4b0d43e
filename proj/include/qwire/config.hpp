// Structured-text scenario configuration: [section] headers, key = value
// lines, '#' comments, space-separated lists, and the literals "auto" and
// "inf".  Keys carry their units in the name.  Unknown or duplicate keys are
// hard errors; typed getters track consumption so typos cannot pass silently.
#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qwire {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace cfgdetail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view token, const std::string& key) {
  double v = 0.0;
  const char* b = token.data();
  const char* e = b + token.size();
  auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e)
    throw ConfigError("config: key '" + key + "': cannot parse number '" +
                      std::string(token) + "'");
  return v;
}

}  // namespace cfgdetail

class ConfigMap {
 public:
  ConfigMap() = default;

  static ConfigMap parse(std::string_view text, const std::string& origin) {
    ConfigMap m;
    m.origin_ = origin;
    std::string section;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = cfgdetail::trim(text.substr(pos, nl - pos));
      pos = nl + 1;
      ++lineno;
      if (line.empty() || line.front() == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(origin + ":" + std::to_string(lineno) +
                            ": malformed section header");
        section = std::string(cfgdetail::trim(line.substr(1, line.size() - 2)));
        if (section.empty())
          throw ConfigError(origin + ":" + std::to_string(lineno) +
                            ": empty section name");
        continue;
      }
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": expected 'key = value'");
      std::string key(cfgdetail::trim(line.substr(0, eq)));
      std::string value(cfgdetail::trim(line.substr(eq + 1)));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      if (!section.empty()) key = section + "." + key;
      if (m.values_.count(key))
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": duplicate key '" + key + "'");
      m.values_[key] = value;
    }
    return m;
  }

  static ConfigMap parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.filename().string());
  }

  // --set section.key=value command-line override.
  void set_override(const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key(cfgdetail::trim(std::string_view(assignment).substr(0, eq)));
    const std::string value(cfgdetail::trim(std::string_view(assignment).substr(eq + 1)));
    if (key.empty() || key.find('.') == std::string::npos)
      throw ConfigError("--set key must be section.key, got '" + key + "'");
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  bool section_present(const std::string& section) const {
    const std::string prefix = section + ".";
    for (const auto& [k, v] : values_)
      if (k.rfind(prefix, 0) == 0) return true;
    return false;
  }

  std::string get_string(const std::string& key, const std::string& dflt) {
    consumed_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  bool get_bool(const std::string& key, bool dflt) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config: key '" + key + "': expected true/false");
  }

  double get_double(const std::string& key, double dflt) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    return cfgdetail::parse_double(it->second, key);
  }

  // "auto" (or absence) -> nullopt.
  std::optional<double> get_double_or_auto(const std::string& key) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end() || it->second == "auto") return std::nullopt;
    return cfgdetail::parse_double(it->second, key);
  }

  // "inf" -> nullopt (used for unbounded plateau).
  std::optional<double> get_double_or_inf(const std::string& key,
                                          std::optional<double> dflt) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second == "inf") return std::nullopt;
    return cfgdetail::parse_double(it->second, key);
  }

  std::vector<double> get_list(const std::string& key,
                               std::vector<double> dflt) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    std::vector<double> out;
    std::string_view rest(it->second);
    while (true) {
      rest = cfgdetail::trim(rest);
      if (rest.empty()) break;
      std::size_t sp = rest.find_first_of(" \t");
      std::string_view tok = rest.substr(0, sp);
      out.push_back(cfgdetail::parse_double(tok, key));
      if (sp == std::string_view::npos) break;
      rest.remove_prefix(sp);
    }
    if (out.empty())
      throw ConfigError("config: key '" + key + "': empty list");
    return out;
  }

  // "auto" (or absence) -> nullopt, otherwise a space-separated list.
  std::optional<std::vector<double>> get_list_or_auto(const std::string& key) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end() || it->second == "auto") return std::nullopt;
    consumed_.erase(key);
    return get_list(key, {});
  }

  // Call after all getters: any untouched key is a typo.
  void require_all_consumed() const {
    for (const auto& [k, v] : values_)
      if (!consumed_.count(k))
        throw ConfigError("config: unknown key '" + k + "' (from " + origin_ +
                          ")");
  }

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
  std::string origin_ = "<inline>";
};

}  // namespace qwire
