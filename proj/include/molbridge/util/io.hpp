// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace molbridge {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Key order in emitted objects is meaningful for golden files, so all JSON
// writing goes through ordered_json.
using Json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Whole-file atomic write: content lands under a temp name and is renamed into
// place, so readers never observe a partial file and failed runs leave no
// half-written outputs behind.
inline void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open file for writing: " + tmp.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError("short write: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot rename into place: " + path);
  }
}

// Calls fn(line_number, parsed_object) for every non-empty line.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(int, const Json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    fn(lineno, obj);
  }
}

}  // namespace molbridge
