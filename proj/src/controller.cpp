#include "agetrack/controller.hpp"

#include "agetrack/errors.hpp"
#include "json_fields.hpp"

#include <cmath>

namespace agetrack {

std::string to_string(ControllerMode m) {
  return m == ControllerMode::retroactive ? "retroactive" : "forward_only";
}

std::string to_string(ControllerAction a) {
  return a == ControllerAction::enable_overlay ? "enable_overlay" : "switch_to_careful";
}

ControllerMode controller_mode_from_string(std::string_view s) {
  if (s == "forward_only") return ControllerMode::forward_only;
  if (s == "retroactive") return ControllerMode::retroactive;
  throw ConfigError("unknown controller mode '" + std::string(s) + "' (expected forward_only or retroactive)");
}

ControllerConfig ControllerConfig::conservative() { return {}; }

ControllerConfig ControllerConfig::aggressive() {
  ControllerConfig c;
  c.theta_acc = 20.0;
  c.theta_prec = 0.4;
  return c;
}

ControllerConfig ControllerConfig::parse(std::string_view spec) {
  std::string_view head = spec;
  ControllerMode mode = ControllerMode::forward_only;
  if (const auto colon = spec.find(':'); colon != std::string_view::npos) {
    head = spec.substr(0, colon);
    mode = controller_mode_from_string(spec.substr(colon + 1));
  }
  ControllerConfig c;
  if (head == "conservative") {
    c = conservative();
  } else if (head == "aggressive") {
    c = aggressive();
  } else {
    const auto comma = head.find(',');
    if (comma == std::string_view::npos) throw ConfigError("bad controller spec '" + std::string(spec) + "'");
    try {
      c.theta_acc = std::stod(std::string(head.substr(0, comma)));
      c.theta_prec = std::stod(std::string(head.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ConfigError("bad controller thresholds in '" + std::string(spec) + "'");
    }
  }
  c.mode = mode;
  c.validate();
  return c;
}

void ControllerConfig::validate() const {
  if (!std::isfinite(theta_acc) || theta_acc < 0.0) throw ConfigError("controller: theta_acc must be >= 0");
  if (!(theta_prec >= 0.0 && theta_prec <= 1.0)) throw ConfigError("controller: theta_prec must be in [0, 1]");
  if (!enable_overlay && !switch_to_careful) throw ConfigError("controller: no action enabled");
}

nlohmann::json ControllerConfig::to_json() const {
  return {{"theta_acc", theta_acc},
          {"theta_prec", theta_prec},
          {"mode", to_string(mode)},
          {"enable_overlay", enable_overlay},
          {"switch_to_careful", switch_to_careful}};
}

ControllerConfig ControllerConfig::from_json(const nlohmann::json& j) {
  const std::string ctx = "controller";
  ControllerConfig c;
  c.theta_acc = detail::get_or<double>(j, "theta_acc", c.theta_acc, ctx);
  c.theta_prec = detail::get_or<double>(j, "theta_prec", c.theta_prec, ctx);
  c.mode = controller_mode_from_string(detail::get_or<std::string>(j, "mode", to_string(c.mode), ctx));
  c.enable_overlay = detail::get_or<bool>(j, "enable_overlay", c.enable_overlay, ctx);
  c.switch_to_careful = detail::get_or<bool>(j, "switch_to_careful", c.switch_to_careful, ctx);
  c.validate();
  return c;
}

std::vector<ControllerAction> controller_step(int session, const ControllerSignals& signals,
                                              const ControllerConfig& config, ControllerState& state) {
  std::vector<ControllerAction> fired;
  if (session < 1) return fired;
  if (config.enable_overlay && !state.overlay_active() && signals.accumulator_error &&
      *signals.accumulator_error > config.theta_acc) {
    state.overlay_fired_at = session;
    fired.push_back(ControllerAction::enable_overlay);
  }
  if (config.switch_to_careful && !state.careful_active() && signals.precision &&
      *signals.precision < config.theta_prec) {
    state.careful_fired_at = session;
    fired.push_back(ControllerAction::switch_to_careful);
  }
  return fired;
}

ControllerState simulate_controller(const std::vector<ControllerSignals>& trajectory, const ControllerConfig& config) {
  ControllerState state;
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    controller_step(static_cast<int>(t), trajectory[t], config, state);
  }
  return state;
}

}  // namespace agetrack
