#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace diffphy {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

/// Verbosity comes from the DIFFPHY_LOG environment variable
/// (quiet | info | debug); default is info.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("DIFFPHY_LOG");
        if (env == nullptr) return LogLevel::Info;
        if (std::strcmp(env, "quiet") == 0) return LogLevel::Quiet;
        if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return level;
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
    if (log_level() >= LogLevel::Info) {
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

template <typename... Args>
void log_debug(const char* fmt, Args... args) {
    if (log_level() >= LogLevel::Debug) {
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

}  // namespace diffphy
