#include "agetrack/pressure.hpp"

#include "agetrack/errors.hpp"
#include "json_fields.hpp"

#include <cmath>

namespace agetrack {

namespace {

void check_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ConfigError(std::string("pressure: ") + name + " must lie in [0, 1], got " + std::to_string(v));
  }
}

}  // namespace

void PressureConfig::validate() const {
  if (tokens_per_session < 1) throw ConfigError("pressure: tokens_per_session must be >= 1");
  check_fraction(dependency_density, "dependency_density");
  check_fraction(update_rate, "update_rate");
  check_fraction(forget_rate, "forget_rate");
  if (max_chain_depth < 1 || max_chain_depth > 4) throw ConfigError("pressure: max_chain_depth must be in 1..4");
  if (n_confusable_pairs < 0 || n_confusable_pairs > 12) {
    throw ConfigError("pressure: n_confusable_pairs must be in 0..12");
  }
  if (confusable_start_session < 0) throw ConfigError("pressure: confusable_start_session must be >= 0");
  if (warmup_sessions < 0) throw ConfigError("pressure: warmup_sessions must be >= 0");
}

nlohmann::json PressureConfig::to_json() const {
  return {{"tokens_per_session", tokens_per_session},
          {"dependency_density", dependency_density},
          {"update_rate", update_rate},
          {"max_chain_depth", max_chain_depth},
          {"n_confusable_pairs", n_confusable_pairs},
          {"confusable_start_session", confusable_start_session},
          {"warmup_sessions", warmup_sessions},
          {"forget_rate", forget_rate}};
}

PressureConfig PressureConfig::from_json(const nlohmann::json& j) {
  const std::string ctx = "pressure";
  PressureConfig c;
  c.tokens_per_session = detail::get_or<int>(j, "tokens_per_session", c.tokens_per_session, ctx);
  c.dependency_density = detail::get_or<double>(j, "dependency_density", c.dependency_density, ctx);
  c.update_rate = detail::get_or<double>(j, "update_rate", c.update_rate, ctx);
  c.max_chain_depth = detail::get_or<int>(j, "max_chain_depth", c.max_chain_depth, ctx);
  c.n_confusable_pairs = detail::get_or<int>(j, "n_confusable_pairs", c.n_confusable_pairs, ctx);
  c.confusable_start_session = detail::get_or<int>(j, "confusable_start_session", c.confusable_start_session, ctx);
  c.warmup_sessions = detail::get_or<int>(j, "warmup_sessions", c.warmup_sessions, ctx);
  c.forget_rate = detail::get_or<double>(j, "forget_rate", c.forget_rate, ctx);
  return c;
}

PressureConfig preset(std::string_view name) {
  PressureConfig c;
  if (name == "none") {
    return c;
  }
  if (name == "light") {
    c.dependency_density = 0.3;
    c.n_confusable_pairs = 1;
    c.forget_rate = 0.05;
    c.update_rate = 0.1;
    c.max_chain_depth = 2;
    return c;
  }
  if (name == "medium") {
    c.dependency_density = 0.5;
    c.n_confusable_pairs = 3;
    c.forget_rate = 0.1;
    c.update_rate = 0.2;
    c.max_chain_depth = 3;
    return c;
  }
  if (name == "heavy") {
    c.dependency_density = 0.7;
    c.n_confusable_pairs = 12;
    c.max_chain_depth = 4;
    c.forget_rate = 0.15;
    c.update_rate = 0.3;
    return c;
  }
  throw ConfigError("unknown pressure preset '" + std::string(name) + "' (expected none, light, medium or heavy)");
}

void set_dial(PressureConfig& cfg, std::string_view name, double value) {
  auto as_int = [&](const char* dial) {
    if (std::floor(value) != value) throw ConfigError(std::string("dial ") + dial + " takes an integer");
    return static_cast<int>(value);
  };
  if (name == "tokens_per_session") {
    cfg.tokens_per_session = as_int("tokens_per_session");
  } else if (name == "dependency_density") {
    cfg.dependency_density = value;
  } else if (name == "update_rate") {
    cfg.update_rate = value;
  } else if (name == "max_chain_depth") {
    cfg.max_chain_depth = as_int("max_chain_depth");
  } else if (name == "n_confusable_pairs") {
    cfg.n_confusable_pairs = as_int("n_confusable_pairs");
  } else if (name == "confusable_start_session") {
    cfg.confusable_start_session = as_int("confusable_start_session");
  } else if (name == "warmup_sessions") {
    cfg.warmup_sessions = as_int("warmup_sessions");
  } else if (name == "forget_rate") {
    cfg.forget_rate = value;
  } else {
    throw ConfigError("unknown pressure dial '" + std::string(name) + "'");
  }
}

}  // namespace agetrack
