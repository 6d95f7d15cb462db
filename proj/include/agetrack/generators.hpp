#pragma once

#include "agetrack/package.hpp"
#include "agetrack/pressure.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agetrack {

struct GenerateOptions {
  // Session of the scenario's own maintenance event (S5 flush, S6 recompact).
  // Defaults to floor(N / 2).
  std::optional<int> maintenance_session;
  // Inline [ACCUM_INIT:..] / [ACCUM:..] tokens in S2 environment text.
  bool emit_sentinels = true;
};

// S1..S6. Throws ConfigError on an unknown scenario, n_sessions < 1 or an
// invalid pressure config.
RunPackage generate(std::string_view scenario_id, std::uint64_t seed, int n_sessions, const PressureConfig& pressure,
                    const GenerateOptions& options = {});

const std::vector<std::string>& scenario_ids();

struct LagProbe {
  ProbeSpec probe;
  int session = 0;
  int lag = 0;
  std::string bucket;
};

// Bucket label for a session gap: "1", "2-3", "4-5", "6-7", "8-10", "11+".
std::string lag_bucket(int lag);

// Recall and lag probes that name a source session, annotated with their
// lag. Empty when the scenario emits none.
std::vector<LagProbe> lag_probe_schedule(const RunPackage& pkg);

}  // namespace agetrack
