#pragma once

namespace etlp {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

/// Current verbosity, read once from the ETLP_LOG environment variable
/// ("quiet", "info", "debug"). Defaults to info.
LogLevel log_level();

void log_info(const char* fmt, ...);
void log_debug(const char* fmt, ...);

}  // namespace etlp
