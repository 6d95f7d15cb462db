#pragma once

// Session loop: read -> act -> probe -> score -> write, with lifecycle events,
// counterfactual probe conditions and the runtime controller.

#include "agetrack/agent.hpp"
#include "agetrack/controller.hpp"
#include "agetrack/memory.hpp"
#include "agetrack/package.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agetrack {

enum class ProbeCondition { P1, P2, P3, no_memory_floor, full_context_ceiling };

std::string to_string(ProbeCondition c);
ProbeCondition probe_condition_from_string(std::string_view s);
// Provenance tag of a probe context: memory, oracle_retrieval, fact_graph,
// none or raw_history.
std::string context_source(ProbeCondition c);

enum class SummarizerKind { truncating, extractive, remote };

std::string to_string(SummarizerKind k);
SummarizerKind summarizer_kind_from_string(std::string_view s);

struct RunConfig {
  PolicyConfig policy;
  SummarizerKind summarizer = SummarizerKind::truncating;
  std::optional<EndpointConfig> summarizer_endpoint;
  AgentBinding agent;
  ProbeCondition condition = ProbeCondition::P1;
  std::vector<LifecycleEvent> events;
  // Apply the package's own maintenance event (S5 workspace_flush, S6 recompact).
  bool package_events = true;
  std::optional<ControllerConfig> controller;
  std::uint64_t run_seed = 0;
  // Append probe Q&A to H_t. Off by default: probes are held out.
  bool probes_in_history = false;
  // Also answer every probe under P1, P2 and P3 for failure attribution.
  bool attribution = false;
  // Mark single-blob stores as non-retrievable: P2 is abstained and
  // attribution reports write and read error jointly.
  bool p2_abstain = false;

  // Throws ConfigError.
  void validate() const;
  Json to_json() const;
  static RunConfig from_json(const Json& j);
};

struct EventRecord {
  LifecycleEvent event;
  std::string source;  // "config" or "package"
  bool applied = true;
  std::string note;
  std::size_t words_before = 0;
  std::size_t words_after = 0;
};

struct TaskRecord {
  std::string task_id;
  TaskKind kind = TaskKind::task;
  std::string context_hash;
  std::string response;
  std::optional<double> dep_recall;
  std::optional<double> latency_ms;
};

struct ProbeRecord {
  std::string probe_id;
  ProbeKind kind = ProbeKind::recall;
  std::optional<int> source_session;
  std::string context;
  std::string context_source;
  std::string context_hash;
  std::string response;
  double score = 0.0;
  bool recalled = false;
  // Response contains at least one eval keyword (forbidden ones not checked).
  bool carries_value = false;
  std::optional<double> accumulator_error;
  bool number_missing = false;
  std::optional<bool> interference_correct;
  // Per-condition scores when attribution is on ("P1", "P2", "P3").
  std::map<std::string, double> condition_scores;
  std::optional<double> latency_ms;
};

struct ControllerRecord {
  ControllerAction action = ControllerAction::enable_overlay;
  ControllerMode mode = ControllerMode::forward_only;
  std::optional<double> accumulator_error;
  std::optional<double> precision;
};

struct SessionRecord {
  int session = 0;
  std::vector<EventRecord> events;
  std::vector<TaskRecord> tasks;
  std::vector<ProbeRecord> probes;
  std::vector<ControllerRecord> controller;
  // M_{t+1}: the store after this session's write.
  MemoryState memory;
  std::size_t memory_words = 0;
  PolicyConfig policy;  // configuration in force for this session's write
  std::vector<std::string> warnings;
};

struct RunResult {
  std::string run_id;
  std::string package_digest;
  std::string scenario_id;
  int n_sessions = 0;
  RunConfig config;
  bool complete = false;
  std::string error;
  std::vector<SessionRecord> sessions;

  // One JSON object per line; deterministic for scripted agents.
  std::vector<Json> trace_records() const;
  static RunResult from_trace(const std::vector<Json>& records);
};

// Context for one probe under a condition. `raw_histories` are H_0..H_{t-1}.
std::string build_probe_context(ProbeCondition condition, const MemoryState& state, const ProbeSpec& probe,
                                const FactGraph& graph, const PolicyConfig& config, int session,
                                const std::vector<std::string>& raw_histories = {});

// Sentences of the serialized store that mention any gold keyword of the
// probe's required facts (plus its eval keywords), in store order.
std::string oracle_retrieval(const MemoryState& state, const ProbeSpec& probe, const FactGraph& graph, int session);

// Current-version texts of the required facts (and gold accumulator state
// for accumulator probes), one per line.
std::string oracle_context(const ProbeSpec& probe, const FactGraph& graph, int session);

// Whether an event kind can act on a policy's store.
bool event_compatible(EventKind kind, PolicyKind policy);

// Applies a due event. budget_cut rewrites `config.word_budget` for the next
// write. Throws ConfigError when the event cannot act on the store.
MemoryState apply_lifecycle_event(const MemoryState& state, const LifecycleEvent& event, PolicyConfig& config,
                                  Summarizer& summarizer);

std::unique_ptr<Summarizer> make_summarizer(const RunConfig& config);

// The checks `run` performs before session 0: config validity, event horizon
// and event/policy compatibility.
void check_run(const RunPackage& package, const RunConfig& config);

using TraceSink = std::function<void(const Json&)>;

// Runs the package. Backend faults end the run early with complete=false;
// configuration faults throw ConfigError before session 0. When `sink` is
// given, trace records are streamed as they are produced.
RunResult run(const RunPackage& package, const RunConfig& config, const TraceSink& sink = {},
              AgentPort* agent_override = nullptr, Summarizer* summarizer_override = nullptr);

}  // namespace agetrack
