#pragma once

#include <memory>

namespace spdlog {
class logger;
}

namespace igpk {

/// Library-wide logger writing to stderr. The level is read once from the
/// IGPK_LOG environment variable (error, warn, info, debug); default warn.
spdlog::logger& log();

}  // namespace igpk
