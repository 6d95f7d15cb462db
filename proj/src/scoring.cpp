#include "agetrack/scoring.hpp"

#include "agetrack/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace agetrack {

bool contains_any(std::string_view response, const std::vector<std::string>& keywords) {
  const std::string lowered = text::to_lower(response);
  return std::any_of(keywords.begin(), keywords.end(),
                     [&](const std::string& k) { return text::contains_lowered(lowered, k); });
}

double keyword_score(std::string_view response, const std::vector<std::string>& eval_keywords,
                     const std::vector<std::string>& forbidden_keywords) {
  if (eval_keywords.empty() || response.empty()) return 0.0;
  const std::string lowered = text::to_lower(response);
  for (const auto& f : forbidden_keywords) {
    if (text::contains_lowered(lowered, f)) return 0.0;
  }
  std::size_t hit = 0;
  for (const auto& k : eval_keywords) {
    if (text::contains_lowered(lowered, k)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(eval_keywords.size());
}

double dep_recall(std::string_view response, const std::vector<std::string>& dependency_keywords) {
  if (dependency_keywords.empty() || response.empty()) return 0.0;
  const std::string lowered = text::to_lower(response);
  std::size_t matched = 0;
  for (const auto& k : dependency_keywords) {
    if (text::contains_lowered(lowered, k)) ++matched;
  }
  const double denom = std::max(0.3 * static_cast<double>(dependency_keywords.size()), 1.0);
  return std::min(1.0, static_cast<double>(matched) / denom);
}

std::optional<double> last_number(std::string_view s) {
  std::optional<double> last;
  std::size_t i = 0;
  auto digit = [&](std::size_t k) { return k < s.size() && std::isdigit(static_cast<unsigned char>(s[k])) != 0; };
  while (i < s.size()) {
    if (!digit(i)) {
      ++i;
      continue;
    }
    // A minus sign directly before the number, or before a currency symbol.
    bool negative = false;
    if (i >= 1 && s[i - 1] == '-') negative = true;
    if (i >= 2 && s[i - 1] == '$' && s[i - 2] == '-') negative = true;
    // A preceding digit-free letter run like "D09" or "v2" is an identifier, not a value.
    std::string num;
    std::size_t j = i;
    while (j < s.size()) {
      if (digit(j)) {
        num.push_back(s[j]);
      } else if (s[j] == ',' && digit(j + 1) && !num.empty()) {
        // thousands separator
      } else if (s[j] == '.' && digit(j + 1) && num.find('.') == std::string::npos) {
        num.push_back('.');
      } else {
        break;
      }
      ++j;
    }
    const bool in_word = i >= 1 && std::isalpha(static_cast<unsigned char>(s[i - 1])) != 0;
    if (!in_word) {
      const double v = std::stod(num);
      last = negative ? -v : v;
    }
    i = j;
  }
  return last;
}

AccumulatorScore accumulator_error(std::string_view response, double gold) {
  AccumulatorScore out;
  out.agent_value = last_number(response);
  if (!out.agent_value) {
    out.missing = true;
    out.error = std::fabs(gold);
  } else {
    out.error = std::fabs(*out.agent_value - gold);
  }
  return out;
}

bool interference_correct(std::string_view response, const std::vector<std::string>& target_keywords,
                          const std::vector<std::string>& confusable_keywords) {
  const std::string lowered = text::to_lower(response);
  const bool target = std::any_of(target_keywords.begin(), target_keywords.end(),
                                  [&](const std::string& k) { return text::contains_lowered(lowered, k); });
  return target && !contains_any(response, confusable_keywords);
}

}  // namespace agetrack
