#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace agetrack {

// Generator dials. Fractions are per session; counts are per run.
struct PressureConfig {
  int tokens_per_session = 2000;
  double dependency_density = 0.0;
  double update_rate = 0.0;
  int max_chain_depth = 1;
  int n_confusable_pairs = 0;
  int confusable_start_session = 1;
  int warmup_sessions = 1;
  double forget_rate = 0.0;

  // Throws ConfigError describing the first out-of-range dial.
  void validate() const;

  nlohmann::json to_json() const;
  static PressureConfig from_json(const nlohmann::json& j);

  friend bool operator==(const PressureConfig&, const PressureConfig&) = default;
};

// none | light | medium | heavy. Throws ConfigError on anything else.
PressureConfig preset(std::string_view name);

// Applies "name=value" to one dial; used by the CLI and sweeps.
void set_dial(PressureConfig& cfg, std::string_view name, double value);

}  // namespace agetrack
