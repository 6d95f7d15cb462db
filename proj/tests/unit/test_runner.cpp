#include "agetrack/errors.hpp"
#include "agetrack/generators.hpp"
#include "agetrack/log.hpp"
#include "agetrack/runner.hpp"

#include <gtest/gtest.h>

using namespace agetrack;

namespace {

RunConfig base_config(PolicyKind p, std::string_view agent = "oracle_reader") {
  RunConfig c;
  c.policy.policy = p;
  c.agent = AgentBinding::scripted(agent);
  return c;
}

std::string dump_trace(const RunResult& r) {
  std::string out;
  for (const auto& j : r.trace_records()) out += j.dump() + "\n";
  return out;
}

// Answers normally until `fail_at`, then throws.
class FailingAgent final : public AgentPort {
 public:
  explicit FailingAgent(int fail_at) : inner_(ScriptedProfile::oracle_reader, 0.0, 0), fail_at_(fail_at) {}
  std::string name() const override { return "failing"; }
  AgentReply respond(const AgentRequest& req) override {
    if (req.session >= fail_at_) throw BackendError("backend went away");
    return inner_.respond(req);
  }

 private:
  ScriptedAgent inner_;
  int fail_at_;
};

class QuietRunner : public ::testing::Test {
 protected:
  void SetUp() override { log::set_level(log::Level::off); }
  void TearDown() override { log::set_level(log::Level::warn); }
};

}  // namespace

TEST(Runner, DeterministicTraces) {
  for (const auto& id : scenario_ids()) {
    const auto pkg = generate(id, 7, 6, preset("medium"));
    const auto policy = id == "S5" ? PolicyKind::workspace : PolicyKind::careful_compress;
    auto cfg = base_config(policy, "noisy_reader:0.3");
    cfg.attribution = true;
    EXPECT_EQ(dump_trace(run(pkg, cfg)), dump_trace(run(pkg, cfg))) << id;
  }
}

TEST(Runner, StreamedTraceMatchesAndRoundTrips) {
  const auto pkg = generate("S2", 3, 6, preset("medium"));
  auto cfg = base_config(PolicyKind::append_only);
  cfg.attribution = true;
  std::vector<Json> streamed;
  const auto r = run(pkg, cfg, [&](const Json& j) { streamed.push_back(j); });
  EXPECT_EQ(streamed, r.trace_records());
  const auto back = RunResult::from_trace(streamed);
  EXPECT_EQ(dump_trace(back), dump_trace(r));
  EXPECT_EQ(back.sessions.size(), 6u);
  EXPECT_TRUE(back.complete);
}

TEST(Runner, NoEventsMeansNoEventRecords) {
  const auto pkg = generate("S1", 2, 5, preset("light"));
  const auto r = run(pkg, base_config(PolicyKind::lossy_compress));
  for (const auto& j : r.trace_records()) EXPECT_NE(j["phase"], "event");
  for (const auto& s : r.sessions) EXPECT_TRUE(s.events.empty());
}

TEST(Runner, ConfiguredEventIsRecorded) {
  const auto pkg = generate("S1", 2, 6, preset("light"));
  auto cfg = base_config(PolicyKind::growing_history);
  cfg.events = {LifecycleEvent::parse("flush@3")};
  const auto r = run(pkg, cfg);
  ASSERT_EQ(r.sessions[3].events.size(), 1u);
  EXPECT_EQ(r.sessions[3].events[0].event.kind, EventKind::history_flush);
  EXPECT_EQ(r.sessions[3].events[0].source, "config");
  EXPECT_EQ(r.sessions[3].events[0].words_after, 0u);
  int event_records = 0;
  for (const auto& j : r.trace_records()) event_records += j["phase"] == "event" ? 1 : 0;
  EXPECT_EQ(event_records, 1);
}

TEST(Runner, PackageEventCanBeSkipped) {
  const auto pkg = generate("S6", 2, 8, preset("light"));
  auto cfg = base_config(PolicyKind::careful_compress);
  const auto with = run(pkg, cfg);
  EXPECT_EQ(with.sessions[4].events.size(), 1u);
  EXPECT_EQ(with.sessions[4].events[0].source, "package");
  cfg.package_events = false;
  for (const auto& s : run(pkg, cfg).sessions) EXPECT_TRUE(s.events.empty());
}

TEST(Runner, IncompatibleOrLateEventIsConfigError) {
  const auto pkg = generate("S1", 2, 4, preset("light"));
  auto cfg = base_config(PolicyKind::append_only);
  cfg.events = {LifecycleEvent::parse("recompact@2")};
  EXPECT_THROW(run(pkg, cfg), ConfigError);
  cfg = base_config(PolicyKind::growing_history);
  cfg.events = {LifecycleEvent::parse("flush@9")};
  EXPECT_THROW(run(pkg, cfg), ConfigError);
}

TEST(Runner, BudgetCutAppliesFromNextWrite) {
  const auto pkg = generate("S1", 4, 6, preset("medium"));
  auto cfg = base_config(PolicyKind::growing_history);
  cfg.policy.word_budget = 200;
  cfg.events = {LifecycleEvent::parse("budget_cut:50@3")};
  const auto r = run(pkg, cfg);
  for (int t = 0; t < 6; ++t) {
    const auto& s = r.sessions[static_cast<std::size_t>(t)];
    EXPECT_EQ(s.policy.word_budget, t < 3 ? 200 : 50) << t;
    EXPECT_LE(s.memory_words, static_cast<std::size_t>(s.policy.word_budget)) << t;
  }
}

TEST(Runner, WorkspaceFlushClearsFiles) {
  MemoryState s;
  s.kind = MemoryKind::workspace;
  for (int i = 0; i < 5; ++i) s.files["notes/f" + std::to_string(i) + ".md"] = "content";
  PolicyConfig cfg;
  cfg.policy = PolicyKind::workspace;
  TruncatingSummarizer sum;
  const auto out = apply_lifecycle_event(s, LifecycleEvent::parse("workspace_flush@2"), cfg, sum);
  EXPECT_TRUE(out.files.empty());
}

TEST(Runner, RecompactResummarizesBlob) {
  MemoryState s;
  s.kind = MemoryKind::blob;
  s.blob = "one two three four five six";
  PolicyConfig cfg;
  cfg.policy = PolicyKind::careful_compress;
  cfg.word_budget = 3;
  TruncatingSummarizer sum;
  EXPECT_EQ(apply_lifecycle_event(s, LifecycleEvent::parse("recompact@1"), cfg, sum).blob, "one two three");
  EXPECT_THROW(apply_lifecycle_event(s, LifecycleEvent::parse("workspace_flush@1"), cfg, sum), ConfigError);
}

TEST(Runner, OracleRetrievalExtractsKeywordSentence) {
  FactGraph g;
  const auto f = g.add_fact("Dining budget is $173", {"173"}, "money", 0);
  ProbeSpec p;
  p.probe_id = "q1_1";
  p.question = "What is my dining budget?";
  p.eval_keywords = {"173"};
  p.required_fact_ids = {f.fact_id};
  MemoryState s;
  s.kind = MemoryKind::blob;
  s.blob = "We met on Tuesday. I have a dining budget of $173. The weather was fine.";
  EXPECT_EQ(oracle_retrieval(s, p, g, 1), "I have a dining budget of $173.");
  s.blob = "We met on Tuesday. The weather was fine.";
  EXPECT_EQ(oracle_retrieval(s, p, g, 1), "");
  PolicyConfig cfg;
  cfg.policy = PolicyKind::careful_compress;
  EXPECT_EQ(build_probe_context(ProbeCondition::P3, s, p, g, cfg, 1), "Dining budget is $173");
  EXPECT_EQ(build_probe_context(ProbeCondition::no_memory_floor, s, p, g, cfg, 1), "");
  EXPECT_EQ(build_probe_context(ProbeCondition::full_context_ceiling, s, p, g, cfg, 1, {"h0", "h1"}), "h0\n\nh1");
}

TEST(Runner, OracleContextUsesCurrentVersion) {
  FactGraph g;
  const auto f = g.add_fact("Always book Uber", {"Uber"}, "travel", 0);
  g.supersede_fact(f.lineage_id, "Always book Lyft", {"Lyft"}, 2);
  ProbeSpec p;
  p.required_fact_ids = {f.fact_id};
  EXPECT_EQ(oracle_context(p, g, 1), "Always book Uber");
  EXPECT_EQ(oracle_context(p, g, 3), "Always book Lyft");
}

TEST(Runner, NoMemoryIsolation) {
  // A no-memory store gives an oracle reader nothing beyond the live session.
  for (const auto& id : {"S1", "S3", "S6"}) {
    const auto pkg = generate(id, 5, 8, preset("medium"));
    const auto r = run(pkg, base_config(PolicyKind::no_memory));
    for (const auto& s : r.sessions) {
      for (const auto& p : s.probes) {
        if (p.kind != ProbeKind::recall && p.kind != ProbeKind::lag) continue;
        if (!p.source_session || *p.source_session >= s.session) continue;
        EXPECT_FALSE(p.recalled) << id << " " << p.probe_id;
        EXPECT_EQ(p.score, 0.0) << id << " " << p.probe_id;
      }
    }
  }
}

TEST(Runner, ProbeContextSourceFollowsCondition) {
  const auto pkg = generate("S2", 7, 4, preset("light"));
  for (auto c : {ProbeCondition::P1, ProbeCondition::P2, ProbeCondition::P3, ProbeCondition::no_memory_floor,
                 ProbeCondition::full_context_ceiling}) {
    auto cfg = base_config(PolicyKind::careful_compress);
    cfg.condition = c;
    for (const auto& s : run(pkg, cfg).sessions) {
      for (const auto& p : s.probes) EXPECT_EQ(p.context_source, context_source(c));
    }
  }
}

TEST(Runner, AttributionRecordsAllConditions) {
  const auto pkg = generate("S2", 7, 5, preset("medium"));
  auto cfg = base_config(PolicyKind::lossy_compress);
  cfg.attribution = true;
  for (const auto& s : run(pkg, cfg).sessions) {
    for (const auto& p : s.probes) {
      EXPECT_EQ(p.condition_scores.size(), 3u);
      EXPECT_EQ(p.condition_scores.at("P3"), 1.0) << p.probe_id;
    }
  }
}

TEST_F(QuietRunner, BackendFaultLeavesPartialTrace) {
  const auto pkg = generate("S1", 1, 6, preset("light"));
  FailingAgent agent(2);
  std::vector<Json> streamed;
  const auto r = run(pkg, base_config(PolicyKind::careful_compress), [&](const Json& j) { streamed.push_back(j); },
                     &agent);
  EXPECT_FALSE(r.complete);
  EXPECT_EQ(r.sessions.size(), 3u);
  EXPECT_NE(r.error.find("session 2"), std::string::npos);
  ASSERT_FALSE(streamed.empty());
  EXPECT_EQ(streamed.back()["phase"], "run_end");
  EXPECT_EQ(streamed.back()["complete"], false);
  const auto back = RunResult::from_trace(streamed);
  EXPECT_FALSE(back.complete);
  EXPECT_EQ(back.sessions.size(), 3u);
}

TEST(RunConfig, JsonRoundTripAndValidation) {
  auto cfg = base_config(PolicyKind::careful_compress, "noisy_reader:0.2");
  cfg.events = {LifecycleEvent::parse("budget_cut:50@2")};
  cfg.controller = ControllerConfig::aggressive();
  cfg.condition = ProbeCondition::P2;
  cfg.run_seed = 99;
  const auto back = RunConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
  cfg.policy.word_budget = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
