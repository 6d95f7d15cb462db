#pragma once

#include <cstddef>
#include <string_view>

namespace agetrack::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

void set_level(Level level);
Level level();

void debug(std::string_view msg);
void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);

// Process-wide count of warnings emitted so far (whether or not printed).
std::size_t warning_count();

}  // namespace agetrack::log
