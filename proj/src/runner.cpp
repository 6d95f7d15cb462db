#include "agetrack/runner.hpp"

#include "agetrack/chat_client.hpp"
#include "agetrack/digest.hpp"
#include "agetrack/errors.hpp"
#include "agetrack/log.hpp"
#include "agetrack/prompts.hpp"
#include "agetrack/scoring.hpp"
#include "agetrack/sentinel.hpp"
#include "agetrack/text.hpp"
#include "json_fields.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace agetrack {

using detail::get;
using detail::get_optional;
using detail::get_or;

std::string to_string(ProbeCondition c) {
  switch (c) {
    case ProbeCondition::P1: return "P1";
    case ProbeCondition::P2: return "P2";
    case ProbeCondition::P3: return "P3";
    case ProbeCondition::no_memory_floor: return "no_memory_floor";
    case ProbeCondition::full_context_ceiling: return "full_context_ceiling";
  }
  return "P1";
}

ProbeCondition probe_condition_from_string(std::string_view s) {
  if (s == "P1") return ProbeCondition::P1;
  if (s == "P2") return ProbeCondition::P2;
  if (s == "P3") return ProbeCondition::P3;
  if (s == "no_memory_floor") return ProbeCondition::no_memory_floor;
  if (s == "full_context_ceiling") return ProbeCondition::full_context_ceiling;
  throw ConfigError("unknown probe condition '" + std::string(s) +
                    "' (expected P1, P2, P3, no_memory_floor or full_context_ceiling)");
}

std::string context_source(ProbeCondition c) {
  switch (c) {
    case ProbeCondition::P1: return "memory";
    case ProbeCondition::P2: return "oracle_retrieval";
    case ProbeCondition::P3: return "fact_graph";
    case ProbeCondition::no_memory_floor: return "none";
    case ProbeCondition::full_context_ceiling: return "raw_history";
  }
  return "memory";
}

std::string to_string(SummarizerKind k) {
  switch (k) {
    case SummarizerKind::truncating: return "truncating";
    case SummarizerKind::extractive: return "extractive";
    case SummarizerKind::remote: return "remote";
  }
  return "truncating";
}

SummarizerKind summarizer_kind_from_string(std::string_view s) {
  if (s == "truncating") return SummarizerKind::truncating;
  if (s == "extractive") return SummarizerKind::extractive;
  if (s == "remote") return SummarizerKind::remote;
  throw ConfigError("unknown summarizer '" + std::string(s) + "' (expected truncating, extractive or remote)");
}

void RunConfig::validate() const {
  policy.validate();
  agent.validate();
  if (summarizer == SummarizerKind::remote) {
    if (!summarizer_endpoint) throw ConfigError("remote summarizer needs an endpoint");
    summarizer_endpoint->validate();
  }
  if (controller) controller->validate();
  for (const auto& e : events) {
    if (e.session < 0) throw ConfigError("event " + e.describe() + ": negative session");
    if (e.kind == EventKind::budget_cut && (!e.new_budget || *e.new_budget < 1)) {
      throw ConfigError("event " + e.describe() + ": budget_cut needs a positive budget");
    }
  }
}

Json RunConfig::to_json() const {
  Json ev = Json::array();
  for (const auto& e : events) ev.push_back(e.to_json());
  return {{"policy", policy.to_json()},
          {"summarizer", to_string(summarizer)},
          {"summarizer_endpoint", summarizer_endpoint ? summarizer_endpoint->to_json() : Json(nullptr)},
          {"agent", agent.to_json()},
          {"condition", to_string(condition)},
          {"events", ev},
          {"package_events", package_events},
          {"controller", controller ? controller->to_json() : Json(nullptr)},
          {"run_seed", run_seed},
          {"probes_in_history", probes_in_history},
          {"attribution", attribution},
          {"p2_abstain", p2_abstain}};
}

RunConfig RunConfig::from_json(const Json& j) {
  const std::string ctx = "run_config";
  RunConfig c;
  if (auto it = j.find("policy"); it != j.end()) c.policy = PolicyConfig::from_json(*it);
  c.summarizer = summarizer_kind_from_string(get_or<std::string>(j, "summarizer", to_string(c.summarizer), ctx));
  if (auto it = j.find("summarizer_endpoint"); it != j.end() && !it->is_null()) {
    c.summarizer_endpoint = EndpointConfig::from_json(*it);
  }
  if (auto it = j.find("agent"); it != j.end()) c.agent = AgentBinding::from_json(*it);
  c.condition = probe_condition_from_string(get_or<std::string>(j, "condition", "P1", ctx));
  if (auto it = j.find("events"); it != j.end()) {
    if (!it->is_array()) throw ParseError(ctx + ": events must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      c.events.push_back(LifecycleEvent::from_json((*it)[i], ctx + ".events[" + std::to_string(i) + "]"));
    }
  }
  c.package_events = get_or<bool>(j, "package_events", c.package_events, ctx);
  if (auto it = j.find("controller"); it != j.end() && !it->is_null()) c.controller = ControllerConfig::from_json(*it);
  c.run_seed = get_or<std::uint64_t>(j, "run_seed", c.run_seed, ctx);
  c.probes_in_history = get_or<bool>(j, "probes_in_history", c.probes_in_history, ctx);
  c.attribution = get_or<bool>(j, "attribution", c.attribution, ctx);
  c.p2_abstain = get_or<bool>(j, "p2_abstain", c.p2_abstain, ctx);
  c.validate();
  return c;
}

namespace {

// Keywords of the required facts as of `session`, plus the probe's own.
std::vector<std::string> retrieval_keywords(const ProbeSpec& probe, const FactGraph& graph, int session) {
  std::vector<std::string> out = probe.eval_keywords;
  for (const auto& id : probe.required_fact_ids) {
    if (!graph.has_fact(id)) continue;
    const Fact& f = graph.fact_as_of(graph.fact(id).lineage_id, session);
    if (f.invalidated_at && *f.invalidated_at < session) continue;
    out.insert(out.end(), f.keywords.begin(), f.keywords.end());
  }
  return out;
}

}  // namespace

std::string oracle_retrieval(const MemoryState& state, const ProbeSpec& probe, const FactGraph& graph, int session) {
  const auto keywords = retrieval_keywords(probe, graph, session);
  std::vector<std::string> kept;
  std::set<std::string> seen;
  for (auto& sentence : text::split_sentences(state.serialize_text())) {
    if (!contains_any(sentence, keywords)) continue;
    if (!seen.insert(sentence).second) continue;
    kept.push_back(std::move(sentence));
  }
  return text::join(kept, "\n");
}

std::string oracle_context(const ProbeSpec& probe, const FactGraph& graph, int session) {
  std::vector<std::string> lines;
  std::set<std::string> seen;
  for (const auto& id : probe.required_fact_ids) {
    if (!graph.has_fact(id)) continue;
    const Fact& f = graph.fact_as_of(graph.fact(id).lineage_id, session);
    if (f.invalidated_at && *f.invalidated_at < session) continue;
    if (seen.insert(f.fact_id).second) lines.push_back(f.text);
  }
  if (probe.accumulator) {
    lines.push_back(*probe.accumulator + ": " +
                    text::format_number(graph.gold_accumulator_value(*probe.accumulator, session)));
  }
  return text::join(lines, "\n");
}

std::string build_probe_context(ProbeCondition condition, const MemoryState& state, const ProbeSpec& probe,
                                const FactGraph& graph, const PolicyConfig& config, int session,
                                const std::vector<std::string>& raw_histories) {
  switch (condition) {
    case ProbeCondition::P1: return read_context(state, probe.question, config);
    case ProbeCondition::P2: return oracle_retrieval(state, probe, graph, session);
    case ProbeCondition::P3: return oracle_context(probe, graph, session);
    case ProbeCondition::no_memory_floor: return "";
    case ProbeCondition::full_context_ceiling: return text::join(raw_histories, "\n\n");
  }
  return "";
}

bool event_compatible(EventKind kind, PolicyKind policy) {
  const MemoryKind mk = memory_kind_for(policy);
  switch (kind) {
    case EventKind::history_flush: return mk == MemoryKind::blob || mk == MemoryKind::entries;
    case EventKind::recompact:
    case EventKind::budget_cut: return mk == MemoryKind::blob;
    case EventKind::workspace_flush: return mk == MemoryKind::workspace;
  }
  return false;
}

MemoryState apply_lifecycle_event(const MemoryState& state, const LifecycleEvent& event, PolicyConfig& config,
                                  Summarizer& summarizer) {
  if (!event_compatible(event.kind, config.policy)) {
    throw ConfigError("event " + event.describe() + " cannot act on a " + to_string(config.policy) + " store");
  }
  MemoryState next = state;
  switch (event.kind) {
    case EventKind::history_flush:
      next.blob.clear();
      next.entries.clear();
      break;
    case EventKind::recompact:
      next.blob = checked_summarize(summarizer, next.blob, config.word_budget, prompt_kind_for(config.policy));
      break;
    case EventKind::budget_cut:
      if (!event.new_budget || *event.new_budget < 1) throw ConfigError("budget_cut needs a positive budget");
      config.word_budget = *event.new_budget;
      break;
    case EventKind::workspace_flush:
      next.files.clear();
      break;
  }
  return next;
}

std::unique_ptr<Summarizer> make_summarizer(const RunConfig& config) {
  switch (config.summarizer) {
    case SummarizerKind::truncating: return std::make_unique<TruncatingSummarizer>();
    case SummarizerKind::extractive: return std::make_unique<ExtractiveSummarizer>();
    case SummarizerKind::remote:
      if (!config.summarizer_endpoint) throw ConfigError("remote summarizer needs an endpoint");
      return std::make_unique<RemoteSummarizer>(*config.summarizer_endpoint);
  }
  return std::make_unique<TruncatingSummarizer>();
}

namespace {

Json base_record(const std::string& run_id, int session, const char* phase) {
  return {{"run_id", run_id},     {"session", session}, {"phase", phase},  {"probe_id", nullptr},
          {"context_hash", nullptr}, {"response", nullptr}, {"score", nullptr}, {"event", nullptr},
          {"controller_action", nullptr}};
}

std::vector<Json> session_trace(const std::string& run_id, const SessionRecord& rec, bool with_memory) {
  std::vector<Json> out;
  for (const auto& e : rec.events) {
    Json j = base_record(run_id, rec.session, "event");
    j["event"] = e.event.describe();
    j["event_detail"] = e.event.to_json();
    j["source"] = e.source;
    j["applied"] = e.applied;
    j["note"] = e.note;
    j["words_before"] = e.words_before;
    j["words_after"] = e.words_after;
    out.push_back(std::move(j));
  }
  for (const auto& t : rec.tasks) {
    Json j = base_record(run_id, rec.session, "task");
    j["task_id"] = t.task_id;
    j["task_kind"] = to_string(t.kind);
    j["context_hash"] = t.context_hash;
    j["response"] = t.response;
    j["score"] = detail::optional_to_json(t.dep_recall);
    if (t.latency_ms) j["latency_ms"] = *t.latency_ms;
    out.push_back(std::move(j));
  }
  for (const auto& p : rec.probes) {
    Json j = base_record(run_id, rec.session, "probe");
    j["probe_id"] = p.probe_id;
    j["probe_kind"] = to_string(p.kind);
    j["source_session"] = detail::optional_to_json(p.source_session);
    j["context"] = p.context;
    j["context_source"] = p.context_source;
    j["context_hash"] = p.context_hash;
    j["response"] = p.response;
    j["score"] = p.score;
    j["recalled"] = p.recalled;
    j["carries_value"] = p.carries_value;
    j["accumulator_error"] = detail::optional_to_json(p.accumulator_error);
    j["number_missing"] = p.number_missing;
    j["interference_correct"] = detail::optional_to_json(p.interference_correct);
    j["condition_scores"] = p.condition_scores;
    if (p.latency_ms) j["latency_ms"] = *p.latency_ms;
    out.push_back(std::move(j));
  }
  for (const auto& c : rec.controller) {
    Json j = base_record(run_id, rec.session, "controller");
    j["controller_action"] = to_string(c.action);
    j["mode"] = to_string(c.mode);
    j["accumulator_error"] = detail::optional_to_json(c.accumulator_error);
    j["precision"] = detail::optional_to_json(c.precision);
    out.push_back(std::move(j));
  }
  if (with_memory) {
    Json j = base_record(run_id, rec.session, "memory");
    j["memory"] = rec.memory.to_json();
    j["memory_words"] = rec.memory_words;
    j["policy"] = rec.policy.to_json();
    j["warnings"] = rec.warnings;
    out.push_back(std::move(j));
  }
  return out;
}

Json start_record(const RunResult& r) {
  Json j = base_record(r.run_id, -1, "run_start");
  j["package_digest"] = r.package_digest;
  j["scenario_id"] = r.scenario_id;
  j["n_sessions"] = r.n_sessions;
  j["config"] = r.config.to_json();
  return j;
}

Json end_record(const RunResult& r) {
  Json j = base_record(r.run_id, -1, "run_end");
  j["complete"] = r.complete;
  j["error"] = r.error;
  j["sessions_recorded"] = r.sessions.size();
  return j;
}

}  // namespace

std::vector<Json> RunResult::trace_records() const {
  std::vector<Json> out{start_record(*this)};
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    // Only an aborted final session lacks its write.
    const bool with_memory = complete || i + 1 < sessions.size();
    auto recs = session_trace(run_id, sessions[i], with_memory);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  out.push_back(end_record(*this));
  return out;
}

RunResult RunResult::from_trace(const std::vector<Json>& records) {
  const std::string ctx = "trace";
  RunResult r;
  auto session_for = [&](int s) -> SessionRecord& {
    if (r.sessions.empty() || r.sessions.back().session != s) {
      if (!r.sessions.empty() && r.sessions.back().session > s) throw ParseError(ctx + ": sessions out of order");
      SessionRecord rec;
      rec.session = s;
      r.sessions.push_back(std::move(rec));
    }
    return r.sessions.back();
  };
  for (const auto& j : records) {
    const auto phase = get<std::string>(j, "phase", ctx);
    const int s = get<int>(j, "session", ctx);
    if (phase == "run_start") {
      r.run_id = get<std::string>(j, "run_id", ctx);
      r.package_digest = get<std::string>(j, "package_digest", ctx);
      r.scenario_id = get<std::string>(j, "scenario_id", ctx);
      r.n_sessions = get<int>(j, "n_sessions", ctx);
      r.config = RunConfig::from_json(detail::field(j, "config", ctx));
    } else if (phase == "run_end") {
      r.complete = get<bool>(j, "complete", ctx);
      r.error = get<std::string>(j, "error", ctx);
      // A session aborted before its first record leaves no lines of its own.
      const auto recorded = get_or<std::size_t>(j, "sessions_recorded", r.sessions.size(), ctx);
      while (r.sessions.size() < recorded) {
        session_for(r.sessions.empty() ? 0 : r.sessions.back().session + 1);
      }
    } else if (phase == "event") {
      EventRecord e;
      e.event = LifecycleEvent::from_json(detail::field(j, "event_detail", ctx), ctx + ".event");
      e.source = get<std::string>(j, "source", ctx);
      e.applied = get<bool>(j, "applied", ctx);
      e.note = get<std::string>(j, "note", ctx);
      e.words_before = get<std::size_t>(j, "words_before", ctx);
      e.words_after = get<std::size_t>(j, "words_after", ctx);
      session_for(s).events.push_back(std::move(e));
    } else if (phase == "task") {
      TaskRecord t;
      t.task_id = get<std::string>(j, "task_id", ctx);
      t.kind = task_kind_from_string(get<std::string>(j, "task_kind", ctx));
      t.context_hash = get<std::string>(j, "context_hash", ctx);
      t.response = get<std::string>(j, "response", ctx);
      t.dep_recall = get_optional<double>(j, "score", ctx);
      t.latency_ms = get_optional<double>(j, "latency_ms", ctx);
      session_for(s).tasks.push_back(std::move(t));
    } else if (phase == "probe") {
      ProbeRecord p;
      p.probe_id = get<std::string>(j, "probe_id", ctx);
      p.kind = probe_kind_from_string(get<std::string>(j, "probe_kind", ctx));
      p.source_session = get_optional<int>(j, "source_session", ctx);
      p.context = get<std::string>(j, "context", ctx);
      p.context_source = get<std::string>(j, "context_source", ctx);
      p.context_hash = get<std::string>(j, "context_hash", ctx);
      p.response = get<std::string>(j, "response", ctx);
      p.score = get<double>(j, "score", ctx);
      p.recalled = get<bool>(j, "recalled", ctx);
      p.carries_value = get<bool>(j, "carries_value", ctx);
      p.accumulator_error = get_optional<double>(j, "accumulator_error", ctx);
      p.number_missing = get<bool>(j, "number_missing", ctx);
      p.interference_correct = get_optional<bool>(j, "interference_correct", ctx);
      p.condition_scores = get_or<std::map<std::string, double>>(j, "condition_scores", {}, ctx);
      p.latency_ms = get_optional<double>(j, "latency_ms", ctx);
      session_for(s).probes.push_back(std::move(p));
    } else if (phase == "controller") {
      ControllerRecord c;
      const auto action = get<std::string>(j, "controller_action", ctx);
      c.action = action == "enable_overlay" ? ControllerAction::enable_overlay : ControllerAction::switch_to_careful;
      c.mode = controller_mode_from_string(get<std::string>(j, "mode", ctx));
      c.accumulator_error = get_optional<double>(j, "accumulator_error", ctx);
      c.precision = get_optional<double>(j, "precision", ctx);
      session_for(s).controller.push_back(c);
    } else if (phase == "memory") {
      auto& rec = session_for(s);
      rec.memory = MemoryState::from_json(detail::field(j, "memory", ctx));
      rec.memory_words = get<std::size_t>(j, "memory_words", ctx);
      rec.policy = PolicyConfig::from_json(detail::field(j, "policy", ctx));
      rec.warnings = get_or<std::vector<std::string>>(j, "warnings", {}, ctx);
    } else {
      throw ParseError(ctx + ": unknown phase '" + phase + "'");
    }
  }
  return r;
}

namespace {

struct PendingEvent {
  LifecycleEvent event;
  std::string source;
};

ControllerSignals session_signals(const SessionRecord& rec) {
  ControllerSignals sig;
  double err_sum = 0.0;
  int err_n = 0;
  int prec_hit = 0;
  for (const auto& p : rec.probes) {
    if (p.accumulator_error) {
      err_sum += *p.accumulator_error;
      ++err_n;
    }
    if (p.carries_value) ++prec_hit;
  }
  if (err_n > 0) sig.accumulator_error = err_sum / err_n;
  if (!rec.probes.empty()) sig.precision = static_cast<double>(prec_hit) / static_cast<double>(rec.probes.size());
  return sig;
}

}  // namespace

void check_run(const RunPackage& package, const RunConfig& config) {
  config.validate();
  for (const auto& e : config.events) {
    if (e.session >= package.n_sessions) {
      throw ConfigError("event " + e.describe() + " is outside the run horizon of " +
                        std::to_string(package.n_sessions) + " sessions");
    }
    if (!event_compatible(e.kind, config.policy.policy)) {
      throw ConfigError("event " + e.describe() + " cannot act on a " + to_string(config.policy.policy) + " store");
    }
  }
  if (static_cast<int>(package.scripts.size()) != package.n_sessions) {
    throw ValidationError("package has " + std::to_string(package.scripts.size()) + " scripts for " +
                          std::to_string(package.n_sessions) + " sessions");
  }
}

RunResult run(const RunPackage& package, const RunConfig& config, const TraceSink& sink, AgentPort* agent_override,
              Summarizer* summarizer_override) {
  check_run(package, config);

  std::unique_ptr<AgentPort> owned_agent;
  AgentPort* agent = agent_override;
  if (agent == nullptr) {
    owned_agent = make_agent(config.agent, config.run_seed);
    agent = owned_agent.get();
  }
  std::unique_ptr<Summarizer> owned_summarizer;
  Summarizer* summarizer = summarizer_override;
  if (summarizer == nullptr) {
    owned_summarizer = make_summarizer(config);
    summarizer = owned_summarizer.get();
  }

  RunResult result;
  result.package_digest = package_digest(package);
  result.scenario_id = package.scenario_id;
  result.n_sessions = package.n_sessions;
  result.config = config;
  result.run_id = short_digest(result.package_digest + "|" + config.to_json().dump());
  auto emit = [&](const Json& j) {
    if (sink) sink(j);
  };
  emit(start_record(result));

  PolicyConfig policy = config.policy;
  MemoryState state = initial_state(policy);
  ControllerState cstate;
  std::vector<std::string> histories;  // H_t as written
  std::vector<std::string> raw_envs;   // env text before sentinel stripping
  const FactGraph& graph = package.graph;

  for (int t = 0; t < package.n_sessions; ++t) {
    const SessionScript& script = package.scripts[static_cast<std::size_t>(t)];
    SessionRecord rec;
    rec.session = t;
    try {
      // 1. lifecycle events
      std::vector<PendingEvent> due;
      for (const auto& e : config.events) {
        if (e.session == t) due.push_back({e, "config"});
      }
      if (config.package_events && script.maintenance_event && script.maintenance_event->session == t) {
        due.push_back({*script.maintenance_event, "package"});
      }
      for (const auto& d : due) {
        EventRecord er;
        er.event = d.event;
        er.source = d.source;
        er.words_before = state.word_count();
        if (!event_compatible(d.event.kind, policy.policy)) {
          er.applied = false;
          er.note = "skipped: cannot act on a " + to_string(policy.policy) + " store";
          log::warn("session " + std::to_string(t) + ": package event " + d.event.describe() + " " + er.note);
        } else {
          state = apply_lifecycle_event(state, d.event, policy, *summarizer);
        }
        er.words_after = state.word_count();
        rec.events.push_back(std::move(er));
      }

      // 2. live session text; the overlay consumes sentinels up front so the
      // sidecar is current when probes are asked
      std::string env = script.env_text;
      bool env_stripped = false;
      if (policy.overlay_enabled) {
        auto parsed = parse_sentinels(env);
        rec.warnings.insert(rec.warnings.end(), parsed.warnings.begin(), parsed.warnings.end());
        state = overlay_apply(std::move(state), parsed.effects, &rec.warnings);
        env = std::move(parsed.text);
        env_stripped = true;
      }
      std::string history = env;

      // 3. tasks
      for (const auto& task : script.tasks) {
        AgentRequest req;
        req.context = read_context(state, task.prompt, policy);
        req.system = prompts::render_system_prompt(package.system_prompt, req.context);
        req.message = env + "\n\nTask: " + task.prompt;
        req.session = t;
        req.task = &task;
        req.graph = &graph;
        auto reply = agent->respond(req);
        TaskRecord tr;
        tr.task_id = task.task_id;
        tr.kind = task.kind;
        tr.context_hash = short_digest(req.system + "\n\n" + req.message);
        tr.response = reply.text;
        tr.latency_ms = reply.latency_ms;
        if (task.kind == TaskKind::dependency) tr.dep_recall = dep_recall(reply.text, task.dependency_keywords);
        history += "\n\nTask: " + task.prompt + "\nResponse: " + reply.text;
        rec.tasks.push_back(std::move(tr));
      }

      // 4. probes
      const bool p2_abstained = config.p2_abstain && is_blob_policy(policy.policy);
      auto ask = [&](const ProbeSpec& probe, ProbeCondition cond, std::string* context_out,
                     std::string* hash_out, std::optional<double>* latency_out) {
        AgentRequest req;
        req.context = build_probe_context(cond, state, probe, graph, policy, t, histories);
        req.system = prompts::render_system_prompt(package.system_prompt, req.context);
        req.message = env + "\n\nQuestion: " + probe.question;
        req.session = t;
        req.probe = &probe;
        req.graph = &graph;
        auto reply = agent->respond(req);
        if (context_out) *context_out = req.context;
        if (hash_out) *hash_out = short_digest(req.system + "\n\n" + req.message);
        if (latency_out) *latency_out = reply.latency_ms;
        return reply.text;
      };
      for (const auto& probe : script.probes) {
        ProbeRecord pr;
        pr.probe_id = probe.probe_id;
        pr.kind = probe.kind;
        pr.source_session = probe.source_session;
        pr.context_source = context_source(config.condition);
        pr.response = ask(probe, config.condition, &pr.context, &pr.context_hash, &pr.latency_ms);
        pr.score = keyword_score(pr.response, probe.eval_keywords, probe.forbidden_keywords);
        pr.recalled = pr.score > 0.0;
        pr.carries_value = contains_any(pr.response, probe.eval_keywords);
        if (probe.accumulator) {
          const double gold = graph.gold_accumulator_value(*probe.accumulator, t);
          const auto acc = accumulator_error(pr.response, gold);
          pr.accumulator_error = acc.error;
          pr.number_missing = acc.missing;
        }
        if (probe.kind == ProbeKind::interference) {
          pr.interference_correct = interference_correct(pr.response, probe.eval_keywords, probe.confusable_keywords);
        }
        if (config.attribution) {
          for (auto cond : {ProbeCondition::P1, ProbeCondition::P2, ProbeCondition::P3}) {
            if (cond == ProbeCondition::P2 && p2_abstained) continue;
            const std::string response =
                cond == config.condition ? pr.response : ask(probe, cond, nullptr, nullptr, nullptr);
            pr.condition_scores[to_string(cond)] =
                keyword_score(response, probe.eval_keywords, probe.forbidden_keywords);
          }
        }
        if (config.probes_in_history) history += "\n\nQuestion: " + probe.question + "\nResponse: " + pr.response;
        rec.probes.push_back(std::move(pr));
      }

      // 5. controller (session 0 is warm-up)
      bool write_done = false;
      if (config.controller && t >= 1) {
        const auto signals = session_signals(rec);
        const auto fired = controller_step(t, signals, *config.controller, cstate);
        const bool retro = config.controller->mode == ControllerMode::retroactive;
        for (auto action : fired) {
          rec.controller.push_back({action, config.controller->mode, signals.accumulator_error, signals.precision});
          if (action == ControllerAction::enable_overlay) {
            policy.overlay_enabled = true;
            if (retro) {
              // Rebuild the sidecar from every session's sentinels, this one included.
              Sidecar sidecar;
              std::vector<std::string> all_envs = raw_envs;
              all_envs.push_back(script.env_text);
              for (const auto& e : all_envs) {
                sidecar = apply_effects(std::move(sidecar), parse_sentinels(e).effects, &rec.warnings);
              }
              state.sidecar = std::move(sidecar);
              if (!env_stripped) history = parse_sentinels(history).text;
            }
          } else {
            if (!is_blob_policy(policy.policy)) {
              rec.warnings.push_back("switch_to_careful has no effect on a " + to_string(policy.policy) + " store");
              continue;
            }
            policy.policy = PolicyKind::careful_compress;
            if (retro) {
              std::vector<std::string> all = histories;
              all.push_back(history);
              state.blob = checked_summarize(*summarizer, text::join(all, "\n\n"), policy.word_budget,
                                             PromptKind::careful);
              write_done = true;
            }
          }
        }
      }

      // 6. write: M_{t+1} = U(M_t, H_t)
      if (!write_done) state = write_update(state, history, policy, *summarizer, t);
      histories.push_back(history);
      raw_envs.push_back(script.env_text);
      rec.memory = state;
      rec.memory_words = state.word_count();
      rec.policy = policy;
      for (const auto& j : session_trace(result.run_id, rec, true)) emit(j);
      result.sessions.push_back(std::move(rec));
    } catch (const BackendError& e) {
      log::error("run " + result.run_id + " aborted at session " + std::to_string(t) + ": " + e.what());
      result.complete = false;
      result.error = "session " + std::to_string(t) + ": " + e.what();
      for (const auto& j : session_trace(result.run_id, rec, false)) emit(j);
      result.sessions.push_back(std::move(rec));
      emit(end_record(result));
      return result;
    }
  }
  result.complete = true;
  emit(end_record(result));
  return result;
}

}  // namespace agetrack
