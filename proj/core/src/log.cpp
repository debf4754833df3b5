#include "etlp/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace etlp {

LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("ETLP_LOG");
    if (env == nullptr) return LogLevel::kInfo;
    if (std::strcmp(env, "quiet") == 0) return LogLevel::kQuiet;
    if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

namespace {
void vlog(const char* tag, const char* fmt, va_list args) {
  std::fprintf(stderr, "[%s] ", tag);
  std::vfprintf(stderr, fmt, args);
  std::fputc('\n', stderr);
}
}  // namespace

void log_info(const char* fmt, ...) {
  if (log_level() < LogLevel::kInfo) return;
  va_list args;
  va_start(args, fmt);
  vlog("etlp", fmt, args);
  va_end(args);
}

void log_debug(const char* fmt, ...) {
  if (log_level() < LogLevel::kDebug) return;
  va_list args;
  va_start(args, fmt);
  vlog("etlp/debug", fmt, args);
  va_end(args);
}

}  // namespace etlp
