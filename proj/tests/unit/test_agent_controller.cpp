#include "agetrack/agent.hpp"
#include "agetrack/controller.hpp"
#include "agetrack/errors.hpp"

#include <gtest/gtest.h>

using namespace agetrack;

namespace {

ProbeSpec probe(std::vector<std::string> eval, std::string question = "what is it?") {
  ProbeSpec p;
  p.probe_id = "q1_1";
  p.question = std::move(question);
  p.eval_keywords = std::move(eval);
  return p;
}

}  // namespace

TEST(ScriptedAgent, OracleReaderReportsVisibleKeywords) {
  ScriptedAgent a(ScriptedProfile::oracle_reader, 0.0, 1);
  const auto p = probe({"$222", "Bella Notte"});
  AgentRequest req;
  req.context = "remaining budget $222";
  req.message = "question";
  req.probe = &p;
  EXPECT_EQ(a.respond(req).text, "Final Answer: $222");
  req.context = "";
  EXPECT_EQ(a.respond(req).text, ScriptedAgent::kFiller);
}

TEST(ScriptedAgent, AmnesiacIsFiller) {
  ScriptedAgent a(ScriptedProfile::amnesiac, 0.0, 1);
  const auto p = probe({"$222"});
  AgentRequest req;
  req.context = "$222";
  req.probe = &p;
  EXPECT_EQ(a.respond(req).text, ScriptedAgent::kFiller);
}

TEST(ScriptedAgent, NoisyReaderIsDeterministicAndBounded) {
  const auto p = probe({"alpha", "bravo", "charlie", "delta"});
  AgentRequest req;
  req.context = "alpha bravo charlie delta";
  req.probe = &p;
  ScriptedAgent zero(ScriptedProfile::noisy_reader, 0.0, 3);
  ScriptedAgent one(ScriptedProfile::noisy_reader, 1.0, 3);
  ScriptedAgent half(ScriptedProfile::noisy_reader, 0.5, 3);
  EXPECT_EQ(zero.respond(req).text, "Final Answer: alpha; bravo; charlie; delta");
  EXPECT_EQ(one.respond(req).text, ScriptedAgent::kFiller);
  EXPECT_EQ(half.respond(req).text, ScriptedAgent(ScriptedProfile::noisy_reader, 0.5, 3).respond(req).text);
}

TEST(ScriptedAgent, RecencyConfusedPicksClosestThenLatest) {
  FactGraph g;
  g.add_fact("Dining budget is $309", {"$309"}, "money", 0);
  g.add_fact("Travel budget is $507", {"$507"}, "money", 1);
  g.add_fact("Cache hit rate is 66.3%", {"66.3%"}, "infra", 2);
  ScriptedAgent a(ScriptedProfile::recency_confused, 0.0, 1);
  const auto p = probe({"$309"}, "What is the dining budget?");
  AgentRequest req;
  req.context = "$309 and $507 and 66.3%";
  req.probe = &p;
  req.graph = &g;
  req.session = 3;
  EXPECT_EQ(a.respond(req).text, "Final Answer: $309");
  const auto q = probe({"$309"}, "What is the budget?");
  req.probe = &q;
  EXPECT_EQ(a.respond(req).text, "Final Answer: $507");
}

TEST(ScriptedAgent, TaskAcknowledgementAndDependencyCarry) {
  ScriptedAgent a(ScriptedProfile::oracle_reader, 0.0, 1);
  TaskSpec plain{"t1_1", TaskKind::task, "do it", {}, ""};
  TaskSpec dep{"t1_2", TaskKind::dependency, "use it", {"$309", "Bella Notte"}, ""};
  AgentRequest req;
  req.context = "Bella Notte was great";
  req.task = &plain;
  EXPECT_EQ(a.respond(req).text, ScriptedAgent::kAcknowledge);
  req.task = &dep;
  EXPECT_EQ(a.respond(req).text, "Final Answer: Bella Notte");
}

TEST(AgentBinding, ParseSpecs) {
  EXPECT_EQ(AgentBinding::scripted("noisy_reader:0.3").noise_p, 0.3);
  EXPECT_EQ(AgentBinding::scripted("amnesiac").profile, ScriptedProfile::amnesiac);
  EXPECT_THROW(AgentBinding::scripted("amnesiac:0.3"), ConfigError);
  EXPECT_THROW(AgentBinding::scripted("noisy_reader:x"), ConfigError);
  EXPECT_THROW(AgentBinding::scripted("noisy_reader:1.5"), ConfigError);
  const auto b = AgentBinding::scripted("noisy_reader:0.25");
  EXPECT_EQ(AgentBinding::from_json(b.to_json()), b);
}

TEST(Controller, PresetsAndParse) {
  EXPECT_EQ(ControllerConfig::conservative().theta_acc, 50);
  EXPECT_EQ(ControllerConfig::conservative().theta_prec, 0.5);
  EXPECT_EQ(ControllerConfig::aggressive().theta_acc, 20);
  EXPECT_EQ(ControllerConfig::aggressive().theta_prec, 0.4);
  const auto c = ControllerConfig::parse("30,0.6:retroactive");
  EXPECT_EQ(c.theta_acc, 30);
  EXPECT_EQ(c.theta_prec, 0.6);
  EXPECT_EQ(c.mode, ControllerMode::retroactive);
  EXPECT_EQ(ControllerConfig::from_json(c.to_json()), c);
  EXPECT_THROW(ControllerConfig::parse("fast"), ConfigError);
}

TEST(Controller, ErrorOf35SplitsPresets) {
  ControllerState cons;
  ControllerState aggr;
  const ControllerSignals s{35.0, std::nullopt};
  EXPECT_TRUE(controller_step(1, s, ControllerConfig::conservative(), cons).empty());
  const auto fired = controller_step(1, s, ControllerConfig::aggressive(), aggr);
  ASSERT_EQ(fired.size(), 1u);
  EXPECT_EQ(fired[0], ControllerAction::enable_overlay);
  EXPECT_EQ(aggr.overlay_fired_at, 1);
}

TEST(Controller, LatchesAndSkipsWarmup) {
  ControllerState st;
  const auto cfg = ControllerConfig::conservative();
  EXPECT_TRUE(controller_step(0, {500.0, 0.0}, cfg, st).empty());
  EXPECT_EQ(controller_step(2, {500.0, 0.1}, cfg, st).size(), 2u);
  EXPECT_TRUE(controller_step(3, {500.0, 0.1}, cfg, st).empty());
  EXPECT_EQ(st.overlay_fired_at, 2);
  EXPECT_EQ(st.careful_fired_at, 2);
}

TEST(Controller, DisabledActionsNeverFire) {
  auto cfg = ControllerConfig::conservative();
  cfg.enable_overlay = false;
  const auto st = simulate_controller({{}, {999.0, 0.0}, {999.0, 0.0}}, cfg);
  EXPECT_FALSE(st.overlay_active());
  EXPECT_EQ(st.careful_fired_at, 1);
}
