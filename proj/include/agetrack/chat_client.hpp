#pragma once

// Minimal OpenAI-compatible chat-completions client used for remote agents
// and remote summarizers.

#include "agetrack/memory.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agetrack {

struct EndpointConfig {
  // Scheme, host, optional port and path prefix, e.g. "https://api.openai.com/v1".
  std::string base_url;
  std::string model;
  // Bearer token is read from this variable at call time; unset means no
  // Authorization header.
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  std::optional<int> max_tokens;
  int max_attempts = 3;
  double backoff_base_s = 1.0;
  int timeout_s = 120;
  // Pre-flight cap on words across all messages; 0 disables the check.
  int max_context_words = 0;

  // Throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  static EndpointConfig from_json(const nlohmann::json& j);

  friend bool operator==(const EndpointConfig&, const EndpointConfig&) = default;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatResult {
  std::string text;
  double latency_ms = 0.0;
  int attempts = 0;
};

class ChatClient {
 public:
  using Sleeper = std::function<void(double seconds)>;

  explicit ChatClient(EndpointConfig config, Sleeper sleeper = {});

  // One chat completion. Transport failures, 401/403/408/429 and 5xx are
  // retried with doubling backoff; anything else, a malformed payload or the
  // last failed attempt throws BackendError. An oversized request throws
  // BackendError before any network call.
  ChatResult complete(const std::vector<ChatMessage>& messages);

  const EndpointConfig& config() const { return config_; }

 private:
  EndpointConfig config_;
  Sleeper sleeper_;
};

// Summarizer backed by a chat endpoint; the compaction prompt is sent as the
// single user message.
class RemoteSummarizer final : public Summarizer {
 public:
  explicit RemoteSummarizer(EndpointConfig config, ChatClient::Sleeper sleeper = {});
  std::string name() const override { return "remote"; }
  std::string summarize(std::string_view source, int word_budget, PromptKind kind) override;

 private:
  ChatClient client_;
};

}  // namespace agetrack
