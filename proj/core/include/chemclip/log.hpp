#pragma once

#include <string_view>

namespace chemclip {

enum class LogLevel { kQuiet = 0, kWarning = 1, kInfo = 2 };

// Diagnostics go to standard error; outputs that matter are written to files.
void set_log_level(LogLevel level);
LogLevel log_level();
void log_warning(std::string_view message);
void log_info(std::string_view message);

}  // namespace chemclip
