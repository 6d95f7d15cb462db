#include "agetrack/errors.hpp"
#include "agetrack/generators.hpp"
#include "agetrack/text.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace agetrack;

namespace {

int count_kind(const RunPackage& pkg, ProbeKind kind) {
  int n = 0;
  for (const auto& s : pkg.scripts) {
    for (const auto& p : s.probes) n += p.kind == kind ? 1 : 0;
  }
  return n;
}

int count_supersessions(const RunPackage& pkg) {
  int n = 0;
  for (const auto& f : pkg.graph.facts()) n += f.version > 1 ? 1 : 0;
  return n;
}

}  // namespace

TEST(Presets, MatchDialTable) {
  const auto heavy = preset("heavy");
  EXPECT_DOUBLE_EQ(heavy.dependency_density, 0.7);
  EXPECT_EQ(heavy.n_confusable_pairs, 12);
  EXPECT_EQ(heavy.max_chain_depth, 4);
  EXPECT_DOUBLE_EQ(heavy.forget_rate, 0.15);
  const auto light = preset("light");
  EXPECT_DOUBLE_EQ(light.dependency_density, 0.3);
  EXPECT_EQ(light.n_confusable_pairs, 1);
  EXPECT_DOUBLE_EQ(light.forget_rate, 0.05);
  const auto medium = preset("medium");
  EXPECT_DOUBLE_EQ(medium.dependency_density, 0.5);
  EXPECT_EQ(medium.n_confusable_pairs, 3);
  EXPECT_DOUBLE_EQ(medium.forget_rate, 0.1);
  EXPECT_THROW(preset("extreme"), ConfigError);
}

TEST(Presets, DialValidation) {
  PressureConfig p;
  set_dial(p, "n_confusable_pairs", 13);
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_THROW(set_dial(p, "max_chain_depth", 2.5), ConfigError);
  EXPECT_THROW(set_dial(p, "bogus", 1), ConfigError);
  p = PressureConfig{};
  set_dial(p, "update_rate", 1.5);
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Generate, NonePresetHasNoDependencyTasks) {
  for (const auto& id : scenario_ids()) {
    const auto pkg = generate(id, 4, 8, preset("none"));
    for (const auto& s : pkg.scripts) {
      for (const auto& t : s.tasks) EXPECT_NE(t.kind, TaskKind::dependency) << id;
    }
  }
}

TEST(Generate, RejectsBadArguments) {
  EXPECT_THROW(generate("S9", 1, 10, preset("medium")), ConfigError);
  EXPECT_THROW(generate("S1", 1, 0, preset("medium")), ConfigError);
  auto bad = preset("medium");
  bad.forget_rate = -0.1;
  EXPECT_THROW(generate("S1", 1, 10, bad), ConfigError);
}

TEST(Generate, DeterministicPerScenario) {
  for (const auto& id : scenario_ids()) {
    const auto a = serialize_package(generate(id, 7, 10, preset("medium")));
    const auto b = serialize_package(generate(id, 7, 10, preset("medium")));
    EXPECT_EQ(a, b) << id;
    EXPECT_NE(a, serialize_package(generate(id, 8, 10, preset("medium")))) << id;
  }
}

TEST(Generate, PackageRoundTrip) {
  for (const auto& id : scenario_ids()) {
    const auto pkg = generate(id, 2, 6, preset("light"));
    const auto back = load_package(serialize_package(pkg));
    EXPECT_TRUE(back == pkg) << id;
    EXPECT_EQ(package_digest(back), package_digest(pkg));
  }
}

TEST(Generate, WellFormedPackages) {
  for (const auto& id : scenario_ids()) {
    for (const char* pr : {"none", "light", "medium", "heavy"}) {
      const auto pkg = generate(id, 11, 10, preset(pr));
      ASSERT_NO_THROW(pkg.validate()) << id << " " << pr;
      ASSERT_EQ(static_cast<int>(pkg.scripts.size()), 10);
      for (int t = 0; t < 10; ++t) {
        const auto& s = pkg.scripts[static_cast<std::size_t>(t)];
        EXPECT_EQ(s.session_index, t);
        for (const auto& p : s.probes) {
          ASSERT_FALSE(p.eval_keywords.empty()) << p.probe_id;
          for (const auto& f : p.required_fact_ids) ASSERT_TRUE(pkg.graph.has_fact(f)) << p.probe_id;
          if (p.kind == ProbeKind::accumulator) continue;
          // Every eval keyword belongs to the current version of a required fact.
          for (const auto& k : p.eval_keywords) {
            bool found = false;
            for (const auto& f : p.required_fact_ids) {
              const auto& cur = pkg.graph.fact_as_of(pkg.graph.fact(f).lineage_id, t);
              found = found || std::find(cur.keywords.begin(), cur.keywords.end(), k) != cur.keywords.end();
            }
            EXPECT_TRUE(found) << id << " " << pr << " " << p.probe_id << " keyword " << k;
          }
        }
      }
    }
  }
}

TEST(Generate, WarmupRespected) {
  for (const auto& id : scenario_ids()) {
    auto p = preset("heavy");
    p.warmup_sessions = 3;
    const auto pkg = generate(id, 5, 10, p);
    for (const auto& s : pkg.scripts) {
      for (const auto& probe : s.probes) {
        if (probe.kind == ProbeKind::dependency) EXPECT_GE(s.session_index, 3) << id << " " << probe.probe_id;
      }
    }
  }
}

TEST(Generate, PairDialIsMonotone) {
  for (const auto& id : scenario_ids()) {
    std::size_t prev = 0;
    for (int n = 0; n <= 12; n += 2) {
      auto p = preset("medium");
      p.n_confusable_pairs = n;
      const auto pkg = generate(id, 7, 10, p);
      EXPECT_GE(pkg.graph.pairs().size(), prev) << id << " pairs " << n;
      prev = pkg.graph.pairs().size();
    }
  }
}

TEST(Generate, DensityDialIsMonotone) {
  for (const auto& id : scenario_ids()) {
    int prev = 0;
    for (double d : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      auto p = preset("medium");
      p.dependency_density = d;
      const int n = count_kind(generate(id, 7, 10, p), ProbeKind::dependency);
      EXPECT_GE(n, prev) << id << " density " << d;
      prev = n;
    }
  }
}

TEST(Generate, UpdateRateDialIsMonotone) {
  for (const auto& id : scenario_ids()) {
    int prev = 0;
    for (double u : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      auto p = preset("medium");
      p.update_rate = u;
      const int n = count_supersessions(generate(id, 7, 10, p));
      EXPECT_GE(n, prev) << id << " update_rate " << u;
      prev = n;
    }
  }
}

TEST(Generate, PairDialLeavesBaseFactsAlone) {
  // Substreams isolate the pair dial: the non-pair facts stay identical.
  for (const auto& id : scenario_ids()) {
    auto p0 = preset("medium");
    p0.n_confusable_pairs = 0;
    auto p12 = p0;
    p12.n_confusable_pairs = 12;
    const auto a = generate(id, 7, 10, p0);
    const auto b = generate(id, 7, 10, p12);
    std::set<std::string> distractors;
    for (const auto& pr : b.graph.pairs()) distractors.insert(b.graph.fact(pr.fact_b).lineage_id);
    std::vector<std::string> base_a;
    std::vector<std::string> base_b;
    for (const auto& f : a.graph.facts()) base_a.push_back(f.text);
    for (const auto& f : b.graph.facts()) {
      if (!distractors.count(f.lineage_id)) base_b.push_back(f.text);
    }
    EXPECT_EQ(base_a, base_b) << id;
  }
}

TEST(Generate, S2HasOneDiningAccumulatorWithPrefixSums) {
  for (std::uint64_t seed : {1, 7, 42}) {
    const auto pkg = generate("S2", seed, 10, preset("medium"));
    ASSERT_EQ(pkg.graph.accumulators().size(), 1u);
    const auto& acc = pkg.graph.accumulators().front();
    EXPECT_NE(acc.name.find("dining"), std::string::npos);
    double running = acc.initial_value;
    for (int t = 0; t < 10; ++t) {
      for (const auto& d : acc.deltas) {
        if (d.session == t) {
          running += d.value;
          EXPECT_GE(std::fabs(d.value), 10);
          EXPECT_LE(std::fabs(d.value), 120);
          EXPECT_EQ(d.value, std::floor(d.value));
        }
      }
      EXPECT_EQ(pkg.graph.gold_accumulator_value(acc.name, t), running);
    }
  }
}

TEST(Generate, S3HeavyRegistersTwelvePairsFromStartSession) {
  auto p = preset("heavy");
  p.confusable_start_session = 2;
  const auto pkg = generate("S3", 3, 12, p);
  ASSERT_EQ(pkg.graph.pairs().size(), 12u);
  int first = 1 << 30;
  for (const auto& pr : pkg.graph.pairs()) first = std::min(first, pr.injected_session);
  EXPECT_EQ(first, 2);
}

TEST(Generate, ScenarioMaintenanceEvents) {
  const auto s6 = generate("S6", 1, 10, preset("medium"));
  const auto s5 = generate("S5", 1, 10, preset("medium"));
  auto event_at = [](const RunPackage& pkg) -> std::optional<LifecycleEvent> {
    for (const auto& s : pkg.scripts) {
      if (s.maintenance_event) return s.maintenance_event;
    }
    return std::nullopt;
  };
  ASSERT_TRUE(event_at(s6));
  EXPECT_EQ(event_at(s6)->kind, EventKind::recompact);
  EXPECT_EQ(event_at(s6)->session, 5);
  ASSERT_TRUE(event_at(s5));
  EXPECT_EQ(event_at(s5)->kind, EventKind::workspace_flush);
  GenerateOptions o;
  o.maintenance_session = 3;
  EXPECT_EQ(event_at(generate("S6", 1, 10, preset("medium"), o))->session, 3);
}

TEST(Generate, S6HasInvalidationsAndLagProbes) {
  const auto pkg = generate("S6", 7, 10, preset("medium"));
  bool invalidated = false;
  for (const auto& f : pkg.graph.facts()) invalidated = invalidated || f.invalidated_at.has_value();
  EXPECT_TRUE(invalidated);
  const auto lags = lag_probe_schedule(pkg);
  ASSERT_FALSE(lags.empty());
  std::set<int> sessions_probed;
  for (const auto& l : lags) {
    EXPECT_EQ(l.lag, l.session - *l.probe.source_session);
    EXPECT_GE(l.lag, 1);
    EXPECT_EQ(l.bucket, lag_bucket(l.lag));
  }
}

TEST(LagBuckets, Boundaries) {
  EXPECT_EQ(lag_bucket(1), "1");
  EXPECT_EQ(lag_bucket(3), "2-3");
  EXPECT_EQ(lag_bucket(4), "4-5");
  EXPECT_EQ(lag_bucket(8), "8-10");
  EXPECT_EQ(lag_bucket(10), "8-10");
  EXPECT_EQ(lag_bucket(11), "11+");
}

TEST(Generate, TokensPerSessionTarget) {
  for (const auto& id : scenario_ids()) {
    auto p = preset("medium");
    p.tokens_per_session = 800;
    const auto pkg = generate(id, 3, 6, p);
    for (const auto& s : pkg.scripts) {
      const auto words = static_cast<double>(text::word_count(s.env_text));
      EXPECT_LE(words, 800 * 1.2) << id << " session " << s.session_index;
    }
  }
}
