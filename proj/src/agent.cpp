#include "agetrack/agent.hpp"

#include "agetrack/errors.hpp"
#include "agetrack/rng.hpp"
#include "agetrack/text.hpp"
#include "json_fields.hpp"

#include <algorithm>
#include <set>

namespace agetrack {

std::string to_string(ScriptedProfile p) {
  switch (p) {
    case ScriptedProfile::oracle_reader: return "oracle_reader";
    case ScriptedProfile::amnesiac: return "amnesiac";
    case ScriptedProfile::recency_confused: return "recency_confused";
    case ScriptedProfile::noisy_reader: return "noisy_reader";
  }
  return "oracle_reader";
}

ScriptedProfile scripted_profile_from_string(std::string_view s) {
  if (s == "oracle_reader") return ScriptedProfile::oracle_reader;
  if (s == "amnesiac") return ScriptedProfile::amnesiac;
  if (s == "recency_confused") return ScriptedProfile::recency_confused;
  if (s == "noisy_reader") return ScriptedProfile::noisy_reader;
  throw ConfigError("unknown scripted profile '" + std::string(s) +
                    "' (expected oracle_reader, amnesiac, recency_confused or noisy_reader)");
}

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "about", "also",  "been",   "being",  "could",    "current", "does",  "each",   "exact", "figure",
      "from",  "give",  "have",   "into",   "many",     "more",    "most",  "much",   "only",  "other",
      "over",  "reported", "should", "some", "status", "such",    "than",  "that",   "their", "them",
      "then",  "there", "these",  "they",   "this",     "those",   "under", "used",   "were",  "what",
      "when",  "where", "which",  "will",   "with",     "would",   "your",  "listed", "today"};
  return words;
}

std::set<std::string> query_tokens(std::string_view question) {
  std::set<std::string> out;
  for (auto& tok : text::content_tokens(question)) {
    const bool keep = (tok.size() >= 4 || (tok.size() >= 2 && text::has_digit(tok))) && !stopwords().count(tok);
    if (keep) out.insert(std::move(tok));
  }
  return out;
}

std::string final_answer(const std::vector<std::string>& values) {
  return "Final Answer: " + text::join(values, "; ");
}

}  // namespace

ScriptedAgent::ScriptedAgent(ScriptedProfile profile, double noise_p, std::uint64_t run_seed)
    : profile_(profile), noise_p_(noise_p), run_seed_(run_seed) {
  if (noise_p_ < 0.0 || noise_p_ > 1.0) throw ConfigError("noise probability must be in [0, 1]");
}

std::string ScriptedAgent::name() const {
  if (profile_ == ScriptedProfile::noisy_reader) return "noisy_reader:" + text::format_number(noise_p_);
  return to_string(profile_);
}

std::vector<std::string> ScriptedAgent::keep_found(const std::vector<std::string>& keywords, std::string_view visible,
                                                   std::string_view noise_key, int session) const {
  const std::string lowered = text::to_lower(visible);
  std::vector<std::string> found;
  for (const auto& k : keywords) {
    if (text::contains_lowered(lowered, k)) found.push_back(k);
  }
  if (profile_ == ScriptedProfile::noisy_reader && noise_p_ > 0.0) {
    Rng rng(mix_hash(run_seed_, noise_key, session));
    std::vector<std::string> kept;
    for (auto& k : found) {
      if (!rng.bernoulli(noise_p_)) kept.push_back(std::move(k));
    }
    found = std::move(kept);
  }
  return found;
}

AgentReply ScriptedAgent::respond(const AgentRequest& request) {
  AgentReply reply;
  if (request.probe != nullptr) {
    reply.text = answer_probe(request);
  } else if (request.task != nullptr) {
    reply.text = answer_task(request);
  } else {
    reply.text = kAcknowledge;
  }
  return reply;
}

std::string ScriptedAgent::answer_probe(const AgentRequest& request) const {
  const ProbeSpec& probe = *request.probe;
  const std::string visible = request.context + "\n" + request.message;
  switch (profile_) {
    case ScriptedProfile::amnesiac:
      return kFiller;
    case ScriptedProfile::oracle_reader:
    case ScriptedProfile::noisy_reader: {
      auto found = keep_found(probe.eval_keywords, visible, "noisy:" + probe.probe_id, request.session);
      return found.empty() ? kFiller : final_answer(found);
    }
    case ScriptedProfile::recency_confused: {
      if (request.graph == nullptr) return kFiller;
      const auto q = query_tokens(probe.question);
      const std::string lowered = text::to_lower(visible);
      const Fact* best = nullptr;
      std::size_t best_overlap = 0;
      std::vector<std::string> best_values;
      for (const auto& f : request.graph->facts()) {
        if (f.session_introduced > request.session) continue;
        std::set<std::string> shared;
        for (const auto& t : text::content_tokens(f.text)) {
          if (q.count(t) > 0) shared.insert(t);
        }
        if (shared.empty() || shared.size() < best_overlap) continue;
        if (best != nullptr && shared.size() == best_overlap && f.session_introduced < best->session_introduced) {
          continue;
        }
        std::vector<std::string> values;
        for (const auto& k : f.keywords) {
          if (text::contains_lowered(lowered, k)) values.push_back(k);
        }
        if (values.empty()) continue;
        // Among equally similar facts the most recent wins; later graph entries win ties.
        best = &f;
        best_overlap = shared.size();
        best_values = std::move(values);
      }
      return best == nullptr ? kFiller : final_answer(best_values);
    }
  }
  return kFiller;
}

std::string ScriptedAgent::answer_task(const AgentRequest& request) const {
  const TaskSpec& task = *request.task;
  if (profile_ == ScriptedProfile::amnesiac) return kAcknowledge;
  switch (task.kind) {
    case TaskKind::task:
      return kAcknowledge;
    case TaskKind::dependency: {
      auto found = keep_found(task.dependency_keywords, request.context + "\n" + request.message,
                              "noisy:" + task.task_id, request.session);
      return found.empty() ? kAcknowledge : final_answer(found);
    }
    case TaskKind::save: {
      std::vector<std::string> lines;
      for (const auto& line : text::split_lines(request.message)) {
        const auto t = text::trim(line);
        if (t.rfind("[new_info]", 0) == 0) lines.push_back(t);
      }
      lines = keep_found(lines, request.message, "noisy:" + task.task_id, request.session);
      if (lines.empty()) return kAcknowledge;
      const std::string topic = task.topic.empty() ? "session_" + std::to_string(request.session) : task.topic;
      const Json input = {{"path", "notes/" + topic + ".md"}, {"content", text::join(lines, "\n")}, {"append", true}};
      return "Action: write_file\nAction Input: " + input.dump();
    }
  }
  return kAcknowledge;
}

RemoteAgent::RemoteAgent(EndpointConfig config, ChatClient::Sleeper sleeper)
    : client_(std::move(config), std::move(sleeper)) {}

AgentReply RemoteAgent::respond(const AgentRequest& request) {
  auto res = client_.complete({{"system", request.system}, {"user", request.message}});
  AgentReply reply;
  reply.text = std::move(res.text);
  reply.latency_ms = res.latency_ms;
  reply.attempts = res.attempts;
  return reply;
}

AgentBinding AgentBinding::scripted(std::string_view spec) {
  AgentBinding b;
  b.kind = Kind::scripted;
  const auto colon = spec.find(':');
  b.profile = scripted_profile_from_string(spec.substr(0, colon));
  if (colon != std::string_view::npos) {
    if (b.profile != ScriptedProfile::noisy_reader) {
      throw ConfigError("only noisy_reader takes a parameter: '" + std::string(spec) + "'");
    }
    try {
      std::size_t used = 0;
      const std::string num(spec.substr(colon + 1));
      b.noise_p = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("bad noise probability in '" + std::string(spec) + "'");
    }
  }
  b.validate();
  return b;
}

AgentBinding AgentBinding::remote(EndpointConfig endpoint) {
  AgentBinding b;
  b.kind = Kind::remote;
  b.endpoint = std::move(endpoint);
  b.validate();
  return b;
}

void AgentBinding::validate() const {
  if (kind == Kind::remote) {
    if (!endpoint) throw ConfigError("remote agent binding needs an endpoint");
    endpoint->validate();
  } else if (noise_p < 0.0 || noise_p > 1.0) {
    throw ConfigError("noise probability must be in [0, 1]");
  }
}

std::string AgentBinding::describe() const {
  if (kind == Kind::remote) return "remote:" + (endpoint ? endpoint->model : std::string("?"));
  if (profile == ScriptedProfile::noisy_reader) return "noisy_reader:" + text::format_number(noise_p);
  return to_string(profile);
}

Json AgentBinding::to_json() const {
  if (kind == Kind::remote) return {{"kind", "remote"}, {"endpoint", endpoint ? endpoint->to_json() : Json(nullptr)}};
  return {{"kind", "scripted"}, {"profile", to_string(profile)}, {"noise_p", noise_p}};
}

AgentBinding AgentBinding::from_json(const Json& j) {
  const std::string ctx = "agent";
  const auto kind = detail::get_or<std::string>(j, "kind", "scripted", ctx);
  AgentBinding b;
  if (kind == "remote") {
    b.kind = Kind::remote;
    b.endpoint = EndpointConfig::from_json(detail::field(j, "endpoint", ctx));
  } else if (kind == "scripted") {
    b.profile = scripted_profile_from_string(detail::get_or<std::string>(j, "profile", "oracle_reader", ctx));
    b.noise_p = detail::get_or<double>(j, "noise_p", 0.0, ctx);
  } else {
    throw ConfigError("agent: unknown kind '" + kind + "'");
  }
  b.validate();
  return b;
}

std::unique_ptr<AgentPort> make_agent(const AgentBinding& binding, std::uint64_t run_seed) {
  binding.validate();
  if (binding.kind == AgentBinding::Kind::remote) return std::make_unique<RemoteAgent>(*binding.endpoint);
  return std::make_unique<ScriptedAgent>(binding.profile, binding.noise_p, run_seed);
}

}  // namespace agetrack
