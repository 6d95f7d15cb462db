#include "agetrack/errors.hpp"
#include "agetrack/fact_graph.hpp"
#include "agetrack/generators.hpp"
#include "agetrack/log.hpp"
#include "agetrack/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace agetrack;

namespace {

FactGraph small_graph() {
  FactGraph g;
  g.add_fact("CDN Layer cache hit rate: 66.3%", {"66.3%", "201"}, "infra", 2);
  g.add_fact("Always book Lyft, never Uber", {"Lyft", "Uber"}, "travel", 0);
  g.add_fact("Manager is IngridM68", {"IngridM68"}, "people", 1);
  return g;
}

}  // namespace

TEST(FactGraph, AddFactStartsLineageAtVersionOne) {
  FactGraph g;
  const auto f = g.add_fact("CDN Layer cache hit rate: 66.3%", {"66.3%", "201"}, "infra", 2);
  EXPECT_EQ(f.version, 1);
  EXPECT_TRUE(f.valid);
  EXPECT_EQ(f.session_introduced, 2);
  EXPECT_EQ(g.current_fact(f.lineage_id).fact_id, f.fact_id);
}

TEST(FactGraph, AddFactRejectsDegenerateInput) {
  FactGraph g;
  EXPECT_THROW(g.add_fact("", {"x"}, "d", 0), ValidationError);
  EXPECT_THROW(g.add_fact("text", {}, "d", 0), ValidationError);
  EXPECT_THROW(g.add_fact("text", {"x"}, "d", -1), ValidationError);
  g.add_fact("text", {"x"}, "d", 0, std::string("dup"));
  EXPECT_THROW(g.add_fact("other", {"y"}, "d", 0, std::string("dup")), ValidationError);
}

TEST(FactGraph, SameTextTwiceGivesTwoLineages) {
  FactGraph g;
  const auto a = g.add_fact("Budget is $50", {"$50"}, "d", 0);
  const auto b = g.add_fact("Budget is $50", {"$50"}, "d", 3);
  EXPECT_NE(a.fact_id, b.fact_id);
  EXPECT_NE(a.lineage_id, b.lineage_id);
  EXPECT_EQ(g.lineage_ids().size(), 2u);
}

TEST(FactGraph, SupersedeRetiresDroppedKeywords) {
  FactGraph g;
  const auto f = g.add_fact("Always book Lyft, never Uber", {"Lyft", "Uber"}, "travel", 0);
  const auto v2 = g.supersede_fact(f.lineage_id, "Always book Lyft, never Curb", {"Lyft", "Curb"}, 2);
  EXPECT_EQ(v2.version, 2);
  EXPECT_EQ(g.lineage(f.lineage_id).size(), 2u);
  EXPECT_EQ(g.current_fact(f.lineage_id).fact_id, v2.fact_id);
  const auto& old = g.fact(f.fact_id);
  ASSERT_TRUE(old.superseded_at.has_value());
  EXPECT_EQ(*old.superseded_at, 2);
  EXPECT_EQ(old.superseded_keywords, std::vector<std::string>{"Uber"});
  EXPECT_FALSE(g.forbidden_keywords(2).count("Uber"));
  EXPECT_TRUE(g.forbidden_keywords(3).count("Uber"));
  EXPECT_FALSE(g.forbidden_keywords(3).count("Lyft"));
}

TEST(FactGraph, ThreeSupersessionsGiveChainOfFour) {
  FactGraph g;
  const auto f = g.add_fact("v1 value 1", {"k1"}, "d", 0);
  for (int i = 2; i <= 4; ++i) {
    const int before = g.current_fact(f.lineage_id).version;
    g.supersede_fact(f.lineage_id, "v value " + std::to_string(i), {"k" + std::to_string(i)}, i);
    EXPECT_EQ(g.current_fact(f.lineage_id).version, before + 1);
  }
  EXPECT_EQ(g.current_fact(f.lineage_id).version, 4);
  EXPECT_EQ(g.lineage(f.lineage_id).size(), 4u);
  EXPECT_EQ(g.fact_as_of(f.lineage_id, 2).version, 2);
  EXPECT_EQ(g.fact_as_of(f.lineage_id, 0).version, 1);
}

TEST(FactGraph, SupersedeUnknownLineageIsLookupFault) {
  FactGraph g;
  EXPECT_THROW(g.supersede_fact("nope", "t", {"k"}, 1), LookupError);
  EXPECT_THROW(g.current_fact("nope"), LookupError);
}

TEST(FactGraph, InvalidateIsIdempotentAndTimed) {
  log::set_level(log::Level::off);
  auto g = small_graph();
  const auto& ingrid = *std::find_if(g.facts().begin(), g.facts().end(),
                                     [](const Fact& f) { return f.keywords.front() == "IngridM68"; });
  const std::string id = ingrid.fact_id;
  EXPECT_TRUE(g.invalidate_fact(id, 3));
  const auto snapshot = serialize_graph(g);
  EXPECT_FALSE(g.invalidate_fact(id, 5));
  EXPECT_EQ(serialize_graph(g), snapshot);
  EXPECT_FALSE(g.forbidden_keywords(2).count("IngridM68"));
  EXPECT_FALSE(g.forbidden_keywords(3).count("IngridM68"));
  EXPECT_TRUE(g.forbidden_keywords(4).count("IngridM68"));
  log::set_level(log::Level::warn);
}

TEST(FactGraph, ForbiddenSetsAreMonotone) {
  const auto pkg = generate("S6", 3, 10, preset("heavy"));
  for (int s = 0; s < 11; ++s) {
    const auto a = pkg.graph.forbidden_keywords(s);
    const auto b = pkg.graph.forbidden_keywords(s + 1);
    EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end())) << "session " << s;
  }
  EXPECT_TRUE(FactGraph().forbidden_keywords(5).empty());
}

TEST(FactGraph, GoldAccumulatorWorkedExample) {
  FactGraph g;
  g.add_accumulator("dining_budget", 309, "USD");
  g.add_delta("dining_budget", 1, -87);
  g.add_delta("dining_budget", 2, -68);
  EXPECT_EQ(g.gold_accumulator_value("dining_budget", 0), 309);
  EXPECT_EQ(g.gold_accumulator_value("dining_budget", 1), 222);
  EXPECT_EQ(g.gold_accumulator_value("dining_budget", 4), 154);
  EXPECT_THROW(g.gold_accumulator_value("nope", 1), LookupError);
}

TEST(FactGraph, GoldValueConservation) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    FactGraph g;
    g.add_accumulator("a", static_cast<double>(rng.uniform_int(0, 1000)), "");
    std::map<int, double> per_session;
    for (int i = 0; i < 12; ++i) {
      const int s = static_cast<int>(rng.uniform_int(0, 9));
      const double v = static_cast<double>(rng.uniform_int(-120, 120));
      per_session[s] += v;
      g.add_delta("a", s, v);
    }
    for (int s = 1; s < 10; ++s) {
      EXPECT_EQ(g.gold_accumulator_value("a", s) - g.gold_accumulator_value("a", s - 1), per_session[s]);
    }
  }
}

TEST(FactGraph, ProbeDepthAndSpan) {
  FactGraph g;
  const auto a = g.add_fact("a 1", {"a1"}, "d", 1);
  const auto b = g.add_fact("b 1", {"b1"}, "d", 4);
  const auto c = g.add_fact("c 1", {"c1"}, "d", 0);
  const auto d = g.add_fact("d 1", {"d1"}, "d", 8);
  g.supersede_fact(b.lineage_id, "b 2", {"b2"}, 5);
  g.supersede_fact(b.lineage_id, "b 3", {"b3"}, 6);

  DependencyProbe standalone{"p0", "q", {a.fact_id}, ProbeType::standalone, 2, {"a1"}, {}};
  EXPECT_EQ(g.probe_session_span(standalone), 0);
  EXPECT_EQ(g.probe_version_depth(standalone), 1);

  DependencyProbe two{"p1", "q", {a.fact_id, b.fact_id}, ProbeType::compare, 7, {"a1"}, {}};
  EXPECT_EQ(g.probe_session_span(two), 3);
  EXPECT_EQ(g.probe_version_depth(two), 3);

  DependencyProbe wide{"p2", "q", {c.fact_id, d.fact_id}, ProbeType::trend, 9, {"c1"}, {}};
  EXPECT_EQ(g.probe_session_span(wide), 8);
}

TEST(FactGraph, HeavyPresetReachesDepthFour) {
  int deepest = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pkg = generate("S1", seed, 12, preset("heavy"));
    for (const auto& p : pkg.graph.probes()) {
      const int d = pkg.graph.probe_version_depth(p);
      EXPECT_GE(d, 1);
      EXPECT_LE(d, 4);
      deepest = std::max(deepest, d);
    }
  }
  EXPECT_EQ(deepest, 4);
}

TEST(FactGraph, SerializationRoundTripsAndIsStable) {
  for (const auto& id : scenario_ids()) {
    const auto pkg = generate(id, 9, 8, preset("medium"));
    const auto doc = serialize_graph(pkg.graph);
    const auto back = load_graph(doc);
    EXPECT_TRUE(back == pkg.graph) << id;
    EXPECT_EQ(serialize_graph(back), doc) << id;
    EXPECT_EQ(serialize_graph(generate(id, 9, 8, preset("medium")).graph), doc) << id;
  }
}

TEST(FactGraph, TruncatedDocumentFailsClosed) {
  const auto doc = serialize_graph(small_graph());
  EXPECT_THROW(load_graph(doc.substr(0, doc.size() / 2)), ParseError);
  EXPECT_THROW(load_graph("{\"schema_version\": 1, \"facts\": [{\"fact_id\": 3}]}"), ParseError);
}
