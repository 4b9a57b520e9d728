#include "core/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace qpat {

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("QPAT_LOG");
    if (!env) return LogLevel::Warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::Error;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

void log_message(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[qpat:%s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

}  // namespace qpat
