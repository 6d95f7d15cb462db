#include "agetrack/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace agetrack::log {
namespace {

Level initial_level() {
  const char* env = std::getenv("AGETRACK_LOG");
  if (env == nullptr) return Level::warn;
  const std::string v(env);
  if (v == "debug") return Level::debug;
  if (v == "info") return Level::info;
  if (v == "error") return Level::error;
  if (v == "off") return Level::off;
  return Level::warn;
}

std::atomic<Level> g_level{initial_level()};
std::atomic<std::size_t> g_warnings{0};
std::mutex g_mu;

void emit(Level lvl, const char* tag, std::string_view msg) {
  if (lvl < g_level.load()) return;
  std::lock_guard<std::mutex> lock(g_mu);
  std::cerr << "[agetrack " << tag << "] " << msg << '\n';
}

}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void debug(std::string_view msg) { emit(Level::debug, "debug", msg); }
void info(std::string_view msg) { emit(Level::info, "info", msg); }
void warn(std::string_view msg) {
  g_warnings.fetch_add(1);
  emit(Level::warn, "warn", msg);
}
void error(std::string_view msg) { emit(Level::error, "error", msg); }

std::size_t warning_count() { return g_warnings.load(); }

}  // namespace agetrack::log
