#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "graphdiff/error.hpp"

extern "C" char** environ;

namespace graphdiff {

// Flat `key = value` configuration files. '#' starts a comment, blank lines
// are ignored, keys are dotted lowercase paths (e.g. edm.sigma_max). Every
// key can be overridden from the environment: GRAPHDIFF_EDM__SIGMA_MAX=1.5
// maps to edm.sigma_max (prefix stripped, lowercased, "__" becomes ".").
class Config {
 public:
  Config() = default;

  static Config from_string(const std::string& text, const std::string& origin = "<string>") {
    Config c;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string where = origin + ":" + std::to_string(line_no);
      std::string s = strip(line);
      if (s.empty() || s[0] == '#') continue;
      const auto eq = s.find('=');
      require(eq != std::string::npos, ErrorCategory::parse, where + ": expected `key = value`");
      const std::string key = strip(s.substr(0, eq));
      const std::string value = strip(s.substr(eq + 1));
      require(!key.empty(), ErrorCategory::parse, where + ": empty key");
      c.kv_[key] = value;
    }
    return c;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCategory::io, "cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path);
  }

  void apply_env_overrides(const std::string& prefix = "GRAPHDIFF_") {
    for (char** e = environ; e && *e; ++e) {
      const std::string entry(*e);
      if (entry.rfind(prefix, 0) != 0) continue;
      const auto eq = entry.find('=');
      if (eq == std::string::npos) continue;
      std::string key = entry.substr(prefix.size(), eq - prefix.size());
      std::transform(key.begin(), key.end(), key.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      size_t pos;
      while ((pos = key.find("__")) != std::string::npos) key.replace(pos, 2, ".");
      kv_[key] = entry.substr(eq + 1);
    }
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  std::string get_str(const std::string& key, const std::string& fallback) const {
    touch(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    touch(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      size_t used = 0;
      const double v = std::stod(it->second, &used);
      require(used == it->second.size(), ErrorCategory::config, "");
      return v;
    } catch (...) {
      throw Error(ErrorCategory::config, "config key '" + key + "': not a number: " + it->second);
    }
  }

  int get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    const int i = static_cast<int>(v);
    require(static_cast<double>(i) == v, ErrorCategory::config,
            "config key '" + key + "': expected an integer");
    return i;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    touch(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
      return std::stoull(it->second);
    } catch (...) {
      throw Error(ErrorCategory::config, "config key '" + key + "': not an unsigned integer");
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    touch(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw Error(ErrorCategory::config, "config key '" + key + "': expected a boolean");
  }

  // Comma-separated integer list, e.g. "1,1,3,1".
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const {
    touch(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<int> out;
    std::istringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(std::stoi(strip(item)));
      } catch (...) {
        throw Error(ErrorCategory::config, "config key '" + key + "': bad integer list");
      }
    }
    require(!out.empty(), ErrorCategory::config, "config key '" + key + "': empty list");
    return out;
  }

  // Keys present in the file but never read by the consumer indicate typos.
  void reject_unknown_keys() const {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : kv_)
      if (!touched_.count(k)) unknown.push_back(k);
    if (!unknown.empty()) {
      std::string msg = "unknown config keys:";
      for (const auto& k : unknown) msg += " " + k;
      throw Error(ErrorCategory::config, msg);
    }
  }

  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : kv_) out += k + " = " + v + "\n";
    return out;
  }

 private:
  static std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  void touch(const std::string& key) const { touched_.insert(key); }

  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> touched_;
};

}  // namespace graphdiff
