#pragma once

// Typed-state overlay: inline accumulator tokens parsed out of session text
// into a numeric sidecar kept next to the text memory.
//
//   [ACCUM_INIT:<name>:<number>]   sets the accumulator
//   [ACCUM:<name>:<signed number>] adds to it
//
// Numbers are an optional sign, digits, and an optional fractional part. No
// thousands separators.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace agetrack {

enum class SentinelKind { init, delta };

struct SentinelEffect {
  SentinelKind kind = SentinelKind::init;
  std::string name;
  double value = 0.0;

  friend bool operator==(const SentinelEffect&, const SentinelEffect&) = default;
};

struct SentinelParse {
  std::string text;  // input with every well-formed token removed
  std::vector<SentinelEffect> effects;
  std::vector<std::string> warnings;
};

// Malformed tokens ("[ACCUM:budget]") stay in the text and produce a warning.
// A delta seen before any init of the same name within this text is kept as
// an effect but noted as a parse-order warning.
SentinelParse parse_sentinels(std::string_view text);

using Sidecar = std::map<std::string, double>;

// Applies effects in order. A delta on a name the sidecar does not hold is
// skipped and reported in `warnings` (when given).
Sidecar apply_effects(Sidecar sidecar, const std::vector<SentinelEffect>& effects,
                      std::vector<std::string>* warnings = nullptr);

// "name: value" per line, names sorted.
std::string render_sidecar(const Sidecar& sidecar);

}  // namespace agetrack
