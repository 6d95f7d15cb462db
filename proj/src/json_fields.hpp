#pragma once

// Field accessors that turn nlohmann type errors into ParseError messages
// naming the record being decoded.

#include "agetrack/errors.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace agetrack::detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) throw ParseError(ctx + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(ctx + ": missing field '" + key + "'");
  return *it;
}

template <typename T>
T get(const nlohmann::json& j, const char* key, const std::string& ctx) {
  const auto& v = field(j, key, ctx);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ctx + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

template <typename T>
std::optional<T> get_optional(const nlohmann::json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) throw ParseError(ctx + ": expected an object");
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ctx + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const std::string& ctx) {
  auto v = get_optional<T>(j, key, ctx);
  return v ? *v : fallback;
}

inline const nlohmann::json& array_field(const nlohmann::json& j, const char* key, const std::string& ctx) {
  const auto& v = field(j, key, ctx);
  if (!v.is_array()) throw ParseError(ctx + ": field '" + key + "' must be an array");
  return v;
}

template <typename T>
nlohmann::json optional_to_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace agetrack::detail
