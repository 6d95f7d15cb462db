#pragma once

// Between-session runtime controller. Watches last-session accumulator error
// and constraint precision and fires one-shot corrective actions.

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agetrack {

enum class ControllerMode { forward_only, retroactive };
enum class ControllerAction { enable_overlay, switch_to_careful };

std::string to_string(ControllerMode m);
std::string to_string(ControllerAction a);
ControllerMode controller_mode_from_string(std::string_view s);

struct ControllerConfig {
  double theta_acc = 50.0;
  double theta_prec = 0.5;
  ControllerMode mode = ControllerMode::forward_only;
  bool enable_overlay = true;
  bool switch_to_careful = true;

  static ControllerConfig conservative();  // (50, 0.5)
  static ControllerConfig aggressive();    // (20, 0.4)
  // "conservative", "aggressive" or "<theta_acc>,<theta_prec>", optionally
  // suffixed with ":retroactive".
  static ControllerConfig parse(std::string_view spec);

  void validate() const;
  nlohmann::json to_json() const;
  static ControllerConfig from_json(const nlohmann::json& j);

  friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

// Signals measured on the session that just finished; nullopt when the
// session had nothing to measure.
struct ControllerSignals {
  std::optional<double> accumulator_error;
  std::optional<double> precision;
};

struct ControllerState {
  std::optional<int> overlay_fired_at;
  std::optional<int> careful_fired_at;

  bool overlay_active() const { return overlay_fired_at.has_value(); }
  bool careful_active() const { return careful_fired_at.has_value(); }
};

// Actions newly fired at `session`. Session 0 is warm-up and never fires;
// an action that already fired is never reported again.
std::vector<ControllerAction> controller_step(int session, const ControllerSignals& signals,
                                              const ControllerConfig& config, ControllerState& state);

// First session at which each action fires over a whole trajectory
// (signals[t] belongs to session t).
ControllerState simulate_controller(const std::vector<ControllerSignals>& trajectory, const ControllerConfig& config);

}  // namespace agetrack
