#include "agetrack/scoring.hpp"

#include <gtest/gtest.h>

using namespace agetrack;

TEST(KeywordScore, Examples) {
  EXPECT_DOUBLE_EQ(keyword_score("hit rate 66.3% over 201 nodes", {"66.3%", "201"}, {}), 1.0);
  EXPECT_DOUBLE_EQ(keyword_score("", {"66.3%", "201"}, {}), 0.0);
  EXPECT_DOUBLE_EQ(keyword_score("only 201", {"66.3%", "201"}, {}), 0.5);
  EXPECT_DOUBLE_EQ(keyword_score("Book LYFT, or Uber", {"lyft"}, {"Uber"}), 0.0);
  EXPECT_DOUBLE_EQ(keyword_score("anything", {}, {}), 0.0);
}

TEST(DepRecall, Formula) {
  const std::vector<std::string> d = {"alpha", "bravo", "charlie", "delta", "echo",
                                      "foxtrot", "golf", "hotel", "india", "juliet"};
  EXPECT_DOUBLE_EQ(dep_recall("alpha bravo charlie", d), 1.0);
  EXPECT_DOUBLE_EQ(dep_recall("alpha", d), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(dep_recall("", d), 0.0);
  EXPECT_DOUBLE_EQ(dep_recall("alpha", {}), 0.0);
  EXPECT_DOUBLE_EQ(dep_recall("alpha", {"alpha", "beta"}), 1.0);
}

TEST(LastNumber, Normalization) {
  EXPECT_EQ(last_number("you have $222 left"), 222.0);
  EXPECT_EQ(last_number("from $1,154.50 to $99"), 99.0);
  EXPECT_EQ(last_number("total $1,154.50"), 1154.5);
  EXPECT_EQ(last_number("over by -$12"), -12.0);
  EXPECT_EQ(last_number("see D09 for details"), std::nullopt);
  EXPECT_EQ(last_number("no digits"), std::nullopt);
}

TEST(AccumulatorError, Examples) {
  auto a = accumulator_error("...you have $222 left", 154);
  EXPECT_DOUBLE_EQ(a.error, 68);
  EXPECT_FALSE(a.missing);
  EXPECT_DOUBLE_EQ(accumulator_error("$154 remaining", 154).error, 0);
  auto m = accumulator_error("I am not sure", 154);
  EXPECT_TRUE(m.missing);
  EXPECT_DOUBLE_EQ(m.error, 154);
}

TEST(InterferenceCorrect, AmbiguityPenalized) {
  EXPECT_TRUE(interference_correct("Final Answer: $309", {"309"}, {"450"}));
  EXPECT_FALSE(interference_correct("Final Answer: $450", {"309"}, {"450"}));
  EXPECT_FALSE(interference_correct("309 or 450", {"309"}, {"450"}));
}

TEST(ContainsAny, CaseInsensitive) {
  EXPECT_TRUE(contains_any("Bella NOTTE tonight", {"bella notte"}));
  EXPECT_FALSE(contains_any("you have a dining budget", {"173"}));
  EXPECT_FALSE(contains_any("anything", {""}));
}
