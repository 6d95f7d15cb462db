#pragma once

#include <string>
#include <string_view>
#include <vector>

// Text helpers shared by the generators, memory policies and scorers.
// All keyword matching in the harness goes through contains_ci.
namespace agetrack::text {

std::string to_lower(std::string_view s);

// Case-insensitive (ASCII) substring test. An empty needle never matches.
bool contains_ci(std::string_view haystack, std::string_view needle);

// Same as contains_ci but with a haystack that is already lower-cased.
bool contains_lowered(std::string_view lowered_haystack, std::string_view needle);

// Whitespace-delimited tokens.
std::vector<std::string> split_words(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
std::size_t word_count(std::string_view s);

// First n words joined by single spaces.
std::string first_words(std::string_view s, std::size_t n);

// Splits on newlines and on sentence terminators (.!?) followed by whitespace.
// Decimal points ("66.3%") and titles ("Dr.") never split. Returned sentences
// are trimmed and non-empty.
std::vector<std::string> split_sentences(std::string_view s);

// Lower-cased alphanumeric tokens, punctuation stripped.
std::vector<std::string> content_tokens(std::string_view s);

std::string trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool has_digit(std::string_view s);

// Two adjacent tokens that each start with an uppercase letter ("Bella Notte").
bool has_capitalized_pair(std::string_view s);

// Replaces the first occurrence of `from` in `s`.
std::string replace_first(std::string s, std::string_view from, std::string_view to);

// Shortest round-trip decimal rendering; integral values print without a
// fractional part ("154", "-12.5").
std::string format_number(double v);

}  // namespace agetrack::text
