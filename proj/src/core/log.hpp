#pragma once

#include <string>

namespace qpat {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Level is read once from the QPAT_LOG environment variable
/// ("error" | "warn" | "info" | "debug", default "warn").
LogLevel log_level();

void log_message(LogLevel level, const std::string& msg);

inline void log_error(const std::string& m) { log_message(LogLevel::Error, m); }
inline void log_warn(const std::string& m) { log_message(LogLevel::Warn, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::Info, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::Debug, m); }

}  // namespace qpat
