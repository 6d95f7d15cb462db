#include "agetrack/chat_client.hpp"

#include "agetrack/errors.hpp"
#include "agetrack/log.hpp"
#include "agetrack/prompts.hpp"
#include "agetrack/text.hpp"
#include "json_fields.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <memory>
#include <regex>
#include <thread>

namespace agetrack {

using detail::get_optional;
using detail::get_or;

void EndpointConfig::validate() const {
  static const std::regex url_re(R"(^https?://[^/\s:]+(:[0-9]+)?(/[^\s]*)?$)");
  if (!std::regex_match(base_url, url_re)) throw ConfigError("endpoint: base_url '" + base_url + "' is not an http(s) URL");
  if (model.empty()) throw ConfigError("endpoint: model is empty");
  if (max_attempts < 1) throw ConfigError("endpoint: max_attempts must be >= 1");
  if (backoff_base_s < 0.0) throw ConfigError("endpoint: backoff_base_s must be >= 0");
  if (timeout_s < 1) throw ConfigError("endpoint: timeout_s must be >= 1");
  if (max_context_words < 0) throw ConfigError("endpoint: max_context_words must be >= 0");
  if (temperature < 0.0 || temperature > 2.0) throw ConfigError("endpoint: temperature must be in [0, 2]");
}

nlohmann::json EndpointConfig::to_json() const {
  return {{"base_url", base_url},
          {"model", model},
          {"api_key_env", api_key_env},
          {"temperature", temperature},
          {"max_tokens", detail::optional_to_json(max_tokens)},
          {"max_attempts", max_attempts},
          {"backoff_base_s", backoff_base_s},
          {"timeout_s", timeout_s},
          {"max_context_words", max_context_words}};
}

EndpointConfig EndpointConfig::from_json(const nlohmann::json& j) {
  const std::string ctx = "endpoint";
  EndpointConfig c;
  c.base_url = detail::get<std::string>(j, "base_url", ctx);
  c.model = detail::get<std::string>(j, "model", ctx);
  c.api_key_env = get_or<std::string>(j, "api_key_env", c.api_key_env, ctx);
  c.temperature = get_or<double>(j, "temperature", c.temperature, ctx);
  c.max_tokens = get_optional<int>(j, "max_tokens", ctx);
  c.max_attempts = get_or<int>(j, "max_attempts", c.max_attempts, ctx);
  c.backoff_base_s = get_or<double>(j, "backoff_base_s", c.backoff_base_s, ctx);
  c.timeout_s = get_or<int>(j, "timeout_s", c.timeout_s, ctx);
  c.max_context_words = get_or<int>(j, "max_context_words", c.max_context_words, ctx);
  c.validate();
  return c;
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

bool retryable_status(int status) {
  return status == 401 || status == 403 || status == 408 || status == 429 || status >= 500;
}

std::string clip(const std::string& s, std::size_t n = 500) {
  return s.size() <= n ? s : s.substr(0, n) + "...";
}

}  // namespace

ChatClient::ChatClient(EndpointConfig config, Sleeper sleeper) : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  config_.validate();
  if (!sleeper_) {
    sleeper_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
  }
}

ChatResult ChatClient::complete(const std::vector<ChatMessage>& messages) {
  std::size_t words = 0;
  for (const auto& m : messages) words += text::word_count(m.content);
  if (config_.max_context_words > 0 && words > static_cast<std::size_t>(config_.max_context_words)) {
    throw BackendError("request of " + std::to_string(words) + " words exceeds max_context_words " +
                       std::to_string(config_.max_context_words));
  }

  nlohmann::json body;
  body["model"] = config_.model;
  body["temperature"] = config_.temperature;
  if (config_.max_tokens) body["max_tokens"] = *config_.max_tokens;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const std::string payload = body.dump();

  const auto url = split_url(config_.base_url);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  std::string last_error;
  double backoff = config_.backoff_base_s;
  const auto start = std::chrono::steady_clock::now();
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    httplib::Client cli(url.origin);
    cli.set_connection_timeout(config_.timeout_s);
    cli.set_read_timeout(config_.timeout_s);
    cli.set_write_timeout(config_.timeout_s);
    auto res = cli.Post(url.path + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status < 200 || res->status >= 300) {
      last_error = "http " + std::to_string(res->status) + ": " + clip(res->body);
      if (!retryable_status(res->status)) throw BackendError("chat completion failed, " + last_error);
    } else {
      auto jr = nlohmann::json::parse(res->body, nullptr, false);
      const bool ok = !jr.is_discarded() && jr.contains("choices") && jr["choices"].is_array() &&
                      !jr["choices"].empty() && jr["choices"][0].is_object() &&
                      jr["choices"][0].contains("message") && jr["choices"][0]["message"].is_object() &&
                      jr["choices"][0]["message"].contains("content") &&
                      jr["choices"][0]["message"]["content"].is_string();
      if (!ok) {
        log::error("malformed chat completion payload: " + clip(res->body, 2000));
        throw BackendError("malformed chat completion payload: " + clip(res->body));
      }
      ChatResult out;
      out.text = jr["choices"][0]["message"]["content"].get<std::string>();
      out.attempts = attempt;
      out.latency_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      return out;
    }
    log::warn("chat completion attempt " + std::to_string(attempt) + "/" + std::to_string(config_.max_attempts) +
              " failed: " + last_error);
    if (attempt < config_.max_attempts) {
      sleeper_(backoff);
      backoff *= 2.0;
    }
  }
  throw BackendError("chat completion failed after " + std::to_string(config_.max_attempts) +
                     " attempts: " + last_error);
}

RemoteSummarizer::RemoteSummarizer(EndpointConfig config, ChatClient::Sleeper sleeper)
    : client_(std::move(config), std::move(sleeper)) {}

std::string RemoteSummarizer::summarize(std::string_view source, int, PromptKind kind) {
  return client_.complete({{"user", render_compaction_prompt(kind, source)}}).text;
}

}  // namespace agetrack
