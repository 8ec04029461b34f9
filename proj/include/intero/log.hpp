#pragma once

#include <cstdlib>
#include <string>
#include <string_view>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "intero/errors.hpp"

namespace intero {

inline spdlog::level::level_enum parse_log_level(std::string_view s) {
    if (s == "error") return spdlog::level::err;
    if (s == "info") return spdlog::level::info;
    if (s == "debug") return spdlog::level::debug;
    throw ConfigError("INTERO_LOG_LEVEL must be one of error, info, debug; got \"" + std::string(s) + "\"");
}

/// Routes the default logger to stderr at the level named by INTERO_LOG_LEVEL (default info).
inline void init_logging() {
    auto logger = spdlog::stderr_logger_mt("intero");
    logger->set_pattern("[%l] %v");
    const char* env = std::getenv("INTERO_LOG_LEVEL");
    logger->set_level(env && *env ? parse_log_level(env) : spdlog::level::info);
    spdlog::set_default_logger(std::move(logger));
}

} // namespace intero
