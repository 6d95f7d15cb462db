#include "agetrack/generators.hpp"

#include "agetrack/errors.hpp"
#include "builder.hpp"

namespace agetrack {

const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids = {"S1", "S2", "S3", "S4", "S5", "S6"};
  return ids;
}

RunPackage generate(std::string_view scenario_id, std::uint64_t seed, int n_sessions, const PressureConfig& pressure,
                    const GenerateOptions& options) {
  if (n_sessions < 1) throw ConfigError("generate: n_sessions must be at least 1, got " + std::to_string(n_sessions));
  pressure.validate();
  std::unique_ptr<gen::Scenario> scenario;
  if (scenario_id == "S1") {
    scenario = gen::make_s1();
  } else if (scenario_id == "S2") {
    scenario = gen::make_s2();
  } else if (scenario_id == "S3") {
    scenario = gen::make_s3();
  } else if (scenario_id == "S4") {
    scenario = gen::make_s4();
  } else if (scenario_id == "S5") {
    scenario = gen::make_s5();
  } else if (scenario_id == "S6") {
    scenario = gen::make_s6();
  } else {
    throw ConfigError("generate: unknown scenario '" + std::string(scenario_id) + "' (expected S1..S6)");
  }
  gen::Builder builder(*scenario, seed, n_sessions, pressure, options);
  for (int t = 0; t < n_sessions; ++t) scenario->session(builder, t);
  return builder.finish();
}

std::string lag_bucket(int lag) {
  if (lag <= 1) return "1";
  if (lag <= 3) return "2-3";
  if (lag <= 5) return "4-5";
  if (lag <= 7) return "6-7";
  if (lag <= 10) return "8-10";
  return "11+";
}

std::vector<LagProbe> lag_probe_schedule(const RunPackage& pkg) {
  std::vector<LagProbe> out;
  for (const auto& s : pkg.scripts) {
    for (const auto& p : s.probes) {
      if (p.kind != ProbeKind::lag && p.kind != ProbeKind::recall) continue;
      if (!p.source_session) continue;
      const int lag = s.session_index - *p.source_session;
      if (lag < 1) continue;
      out.push_back({p, s.session_index, lag, lag_bucket(lag)});
    }
  }
  return out;
}

}  // namespace agetrack
