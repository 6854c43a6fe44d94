// Line-oriented experiment configuration: `key = value` entries grouped under
// [section] headers, addressed as "section.key".  No surprises: '#' comments,
// whitespace trimmed, values are strings until a typed getter parses them.
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kpzlab/errors.hpp"

namespace kpzlab {

namespace detail {
inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace detail

class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text) {
    Config cfg;
    cfg.text_ = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
        }
        section = detail::trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
  }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const { return parse_double(key, get_string(key)); }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long get_int(const std::string& key) const {
    const std::string v = get_string(key);
    try {
      std::size_t pos = 0;
      const long out = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not an integer: '" + v + "'");
    }
  }
  long get_int(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_string(key);
    try {
      std::size_t pos = 0;
      const std::uint64_t out = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a u64: '" + v + "'");
    }
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(get_string(key))) out.push_back(parse_double(key, item));
    return out;
  }
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? get_doubles(key) : fallback;
  }

  // "3x4,6x6" -> {(3,4),(6,6)}
  std::vector<std::pair<int, int>> get_sizes(const std::string& key) const {
    std::vector<std::pair<int, int>> out;
    for (const auto& item : split_list(get_string(key))) {
      const auto x = item.find('x');
      if (x == std::string::npos) throw ConfigError("config key " + key + ": expected MxN items");
      try {
        out.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
      } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": bad size item '" + item + "'");
      }
    }
    return out;
  }
  std::vector<std::pair<int, int>> get_sizes(const std::string& key,
                                             std::vector<std::pair<int, int>> fallback) const {
    return has(key) ? get_sizes(key) : fallback;
  }

  std::vector<std::string> get_strings(const std::string& key) const {
    return split_list(get_string(key));
  }
  std::vector<std::string> get_strings(const std::string& key,
                                       std::vector<std::string> fallback) const {
    return has(key) ? get_strings(key) : fallback;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  const std::string& text() const { return text_; }

  // FNV-1a over the canonicalized key=value map plus any overrides.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&h](const std::string& s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
      }
    };
    for (const auto& [k, v] : values_) {
      feed(k);
      feed("=");
      feed(v);
      feed(";");
    }
    return h;
  }

 private:
  static double parse_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a number: '" + v + "'");
    }
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
      cur = detail::trim(cur);
      if (!cur.empty()) out.push_back(cur);
    }
    return out;
  }

  std::map<std::string, std::string> values_;
  std::string text_;
};

}  // namespace kpzlab
