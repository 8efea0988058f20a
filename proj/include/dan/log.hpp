// Copyright 2026 The dansim Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace dan {

enum class log_level { debug = 0, info = 1, warn = 2, error_level = 3, off = 4 };

/// Level comes from DAN_LOG (debug|info|warn|error|off), read once; the
/// default is warn so simulations stay quiet unless asked.
inline log_level current_log_level() {
  static const log_level lvl = [] {
    const char* env = std::getenv("DAN_LOG");
    if (!env) return log_level::warn;
    std::string_view v(env);
    if (v == "debug") return log_level::debug;
    if (v == "info") return log_level::info;
    if (v == "warn") return log_level::warn;
    if (v == "error") return log_level::error_level;
    if (v == "off") return log_level::off;
    return log_level::warn;
  }();
  return lvl;
}

inline void log_line(log_level lvl, const char* tag, const std::string& msg) {
  if (lvl < current_log_level()) return;
  std::cerr << "[" << tag << "] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  log_line(log_level::debug, "debug", msg);
}
inline void log_info(const std::string& msg) {
  log_line(log_level::info, "info", msg);
}
inline void log_warn(const std::string& msg) {
  log_line(log_level::warn, "warn", msg);
}
inline void log_error(const std::string& msg) {
  log_line(log_level::error_level, "error", msg);
}

}  // namespace dan
