#pragma once

#include "agetrack/chat_client.hpp"
#include "agetrack/fact_graph.hpp"
#include "agetrack/package.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace agetrack {

// One call into an agent. `system` is the rendered system prompt with the
// memory context already substituted; `context` is that memory context on
// its own and `message` the live session text plus the task or probe.
// Scripted agents also see the gold spec of what they are answering; remote
// agents only ever see system and message.
struct AgentRequest {
  std::string system;
  std::string context;
  std::string message;
  int session = 0;
  const TaskSpec* task = nullptr;
  const ProbeSpec* probe = nullptr;
  const FactGraph* graph = nullptr;
};

struct AgentReply {
  std::string text;
  std::optional<double> latency_ms;
  int attempts = 1;
};

class AgentPort {
 public:
  virtual ~AgentPort() = default;
  virtual std::string name() const = 0;
  // Throws BackendError on a backend fault.
  virtual AgentReply respond(const AgentRequest& request) = 0;
};

enum class ScriptedProfile { oracle_reader, amnesiac, recency_confused, noisy_reader };

std::string to_string(ScriptedProfile p);
ScriptedProfile scripted_profile_from_string(std::string_view s);

// Offline test doubles.
//   oracle_reader     every gold keyword found verbatim in context + message
//   amnesiac          fixed filler
//   recency_confused  keywords of the visible fact sharing the most content
//                     words with the question; the most recent one on ties
//   noisy_reader(p)   oracle_reader dropping each found keyword with prob. p
class ScriptedAgent final : public AgentPort {
 public:
  ScriptedAgent(ScriptedProfile profile, double noise_p, std::uint64_t run_seed);
  std::string name() const override;
  AgentReply respond(const AgentRequest& request) override;

  static constexpr const char* kFiller = "Final Answer: I don't know.";
  static constexpr const char* kAcknowledge = "noted.";

 private:
  std::string answer_probe(const AgentRequest& request) const;
  std::string answer_task(const AgentRequest& request) const;
  std::vector<std::string> keep_found(const std::vector<std::string>& keywords, std::string_view visible,
                                      std::string_view noise_key, int session) const;

  ScriptedProfile profile_;
  double noise_p_;
  std::uint64_t run_seed_;
};

class RemoteAgent final : public AgentPort {
 public:
  explicit RemoteAgent(EndpointConfig config, ChatClient::Sleeper sleeper = {});
  std::string name() const override { return "remote:" + client_.config().model; }
  AgentReply respond(const AgentRequest& request) override;

 private:
  ChatClient client_;
};

// Agent selection carried in a RunConfig.
struct AgentBinding {
  enum class Kind { scripted, remote };
  Kind kind = Kind::scripted;
  ScriptedProfile profile = ScriptedProfile::oracle_reader;
  double noise_p = 0.0;
  std::optional<EndpointConfig> endpoint;

  // "oracle_reader", "amnesiac", "recency_confused", "noisy_reader:0.3".
  static AgentBinding scripted(std::string_view spec);
  static AgentBinding remote(EndpointConfig endpoint);

  void validate() const;
  std::string describe() const;
  Json to_json() const;
  static AgentBinding from_json(const Json& j);

  friend bool operator==(const AgentBinding&, const AgentBinding&) = default;
};

std::unique_ptr<AgentPort> make_agent(const AgentBinding& binding, std::uint64_t run_seed);

}  // namespace agetrack
