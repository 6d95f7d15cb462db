#pragma once

// Per-response scoring primitives. All matching is case-insensitive substring
// matching.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agetrack {

bool contains_any(std::string_view response, const std::vector<std::string>& keywords);

// Fraction of eval keywords present, zeroed when any forbidden keyword is
// present. Empty eval set scores 0.
double keyword_score(std::string_view response, const std::vector<std::string>& eval_keywords,
                     const std::vector<std::string>& forbidden_keywords);

// min(1, matched / max(0.3 |D|, 1)); 0 for an empty D.
double dep_recall(std::string_view response, const std::vector<std::string>& dependency_keywords);

// Last numeric literal with currency symbols and thousands separators
// stripped ("$1,154.50" -> 1154.5).
std::optional<double> last_number(std::string_view response);

struct AccumulatorScore {
  double error = 0.0;
  bool missing = false;  // no number in the response; error = |gold|
  std::optional<double> agent_value;
};

AccumulatorScore accumulator_error(std::string_view response, double gold);

// Target value present and none of the confusable values present.
bool interference_correct(std::string_view response, const std::vector<std::string>& target_keywords,
                          const std::vector<std::string>& confusable_keywords);

}  // namespace agetrack
