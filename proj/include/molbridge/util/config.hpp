// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "molbridge/util/text.hpp"

namespace molbridge {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key=value file. '#' starts a comment, blank lines are ignored.
// Command-line flags are expected to win over file values; callers apply
// overrides after load().
class Config {
public:
  Config() = default;

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::string t = trim(line);
      if (t.empty()) continue;
      auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
      std::string key = trim(t.substr(0, eq));
      std::string val = trim(t.substr(eq + 1));
      if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
      cfg.values_[key] = val;
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key, double dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      std::size_t pos = 0;
      double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(it->second);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not a number: " + it->second);
    }
  }

  long long get_int(const std::string& key, long long dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      std::size_t pos = 0;
      long long v = std::stoll(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(it->second);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' is not an integer: " + it->second);
    }
  }

  const std::map<std::string, std::string>& values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

}  // namespace molbridge
