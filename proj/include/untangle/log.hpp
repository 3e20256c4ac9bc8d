#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace untangle {

enum class LogLevel : int { Debug = 0, Info = 1, Warn = 2 };

/// Log verbosity is controlled by the UNTANGLE_LOG environment variable
/// (debug|info|warn). Default is warn.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("UNTANGLE_LOG");
        if (env == nullptr) return LogLevel::Warn;
        if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
        if (std::strcmp(env, "info") == 0) return LogLevel::Info;
        return LogLevel::Warn;
    }();
    return level;
}

template <typename... Args>
inline void log_at(LogLevel lvl, const char* tag, const char* fmt, Args... args) {
    if (static_cast<int>(lvl) < static_cast<int>(log_level())) return;
    std::fprintf(stderr, "[%s] ", tag);
    if constexpr (sizeof...(Args) == 0)
        std::fprintf(stderr, "%s", fmt);
    else
        std::fprintf(stderr, fmt, args...);
    std::fprintf(stderr, "\n");
}

#define UNTANGLE_LOG_DEBUG(...) ::untangle::log_at(::untangle::LogLevel::Debug, "debug", __VA_ARGS__)
#define UNTANGLE_LOG_INFO(...) ::untangle::log_at(::untangle::LogLevel::Info, "info", __VA_ARGS__)
#define UNTANGLE_LOG_WARN(...) ::untangle::log_at(::untangle::LogLevel::Warn, "warn", __VA_ARGS__)

} // namespace untangle
