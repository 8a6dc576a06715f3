#pragma once

#include <string_view>

namespace semgan {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3 };

// Messages below the threshold (SEMGAN_LOG_LEVEL, default info) are dropped.
void log(LogLevel level, std::string_view message);
void set_log_level(LogLevel level);

inline void log_info(std::string_view m) { log(LogLevel::kInfo, m); }
inline void log_warning(std::string_view m) { log(LogLevel::kWarning, m); }

}  // namespace semgan
