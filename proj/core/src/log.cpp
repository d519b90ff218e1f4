#include "igpk/log.hpp"

#include <cstdlib>
#include <string_view>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace igpk {

namespace {

spdlog::level::level_enum level_from_env() {
  const char* raw = std::getenv("IGPK_LOG");
  if (raw == nullptr) return spdlog::level::warn;
  const std::string_view v(raw);
  if (v == "error") return spdlog::level::err;
  if (v == "info") return spdlog::level::info;
  if (v == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}

}  // namespace

spdlog::logger& log() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto lg = std::make_shared<spdlog::logger>("igpk", sink);
    lg->set_level(level_from_env());
    lg->set_pattern("[igpk %l] %v");
    return lg;
  }();
  return *instance;
}

}  // namespace igpk
