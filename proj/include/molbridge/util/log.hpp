// Project MolBridge - Copyright 2026 MolBridge Developers.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace molbridge {

// Verbosity comes from MOLBRIDGE_LOG: quiet | info | debug (default info).
// Diagnostics go to stderr so machine-readable stdout/file output stays clean.
enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
  static LogLevel lvl = [] {
    const char* env = std::getenv("MOLBRIDGE_LOG");
    if (!env) return LogLevel::Info;
    std::string v(env);
    if (v == "quiet" || v == "0") return LogLevel::Quiet;
    if (v == "debug" || v == "2") return LogLevel::Debug;
    return LogLevel::Info;
  }();
  return lvl;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cerr << "[molbridge] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::cerr << "[molbridge:debug] " << msg << "\n";
}

}  // namespace molbridge
