#include "agetrack/chat_client.hpp"
#include "agetrack/errors.hpp"
#include "agetrack/log.hpp"

#include <httplib.h>
#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace agetrack;

namespace {

// Local chat-completions stub. `plan` gives the status of each successive
// call; 200 answers with `reply` (or `body` when set).
class StubServer {
 public:
  StubServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = calls_++;
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      const int status = n < static_cast<int>(plan_.size()) ? plan_[static_cast<std::size_t>(n)] : 200;
      res.status = status;
      if (status == 200) {
        const std::string body = body_.empty()
                                     ? nlohmann::json{{"choices", {{{"message", {{"content", reply_}}}}}}}.dump()
                                     : body_;
        res.set_content(body, "application/json");
      } else {
        res.set_content("{\"error\": \"stub\"}", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  EndpointConfig endpoint() const {
    EndpointConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.model = "stub-model";
    c.api_key_env = "AGETRACK_TEST_KEY";
    c.timeout_s = 5;
    return c;
  }

  std::vector<int> plan_;
  std::string reply_ = "Final Answer: $222";
  std::string body_;
  std::atomic<int> calls_{0};
  std::string last_body_;
  std::string last_auth_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

class ChatClientTest : public ::testing::Test {
 protected:
  void SetUp() override { log::set_level(log::Level::off); }
  void TearDown() override { log::set_level(log::Level::warn); }

  std::vector<double> sleeps_;
  ChatClient::Sleeper sleeper() {
    return [this](double s) { sleeps_.push_back(s); };
  }
};

}  // namespace

TEST_F(ChatClientTest, HappyPath) {
  StubServer stub;
  ::setenv("AGETRACK_TEST_KEY", "sk-test", 1);
  ChatClient client(stub.endpoint(), sleeper());
  const auto r = client.complete({{"system", "be brief"}, {"user", "what is left?"}});
  ::unsetenv("AGETRACK_TEST_KEY");
  EXPECT_EQ(r.text, "Final Answer: $222");
  EXPECT_EQ(r.attempts, 1);
  EXPECT_GE(r.latency_ms, 0.0);
  EXPECT_EQ(stub.last_auth_, "Bearer sk-test");
  const auto body = nlohmann::json::parse(stub.last_body_);
  EXPECT_EQ(body["model"], "stub-model");
  EXPECT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][1]["content"], "what is left?");
  EXPECT_TRUE(sleeps_.empty());
}

TEST_F(ChatClientTest, RetriesTransientStatusWithDoublingBackoff) {
  StubServer stub;
  stub.plan_ = {503, 429};
  auto cfg = stub.endpoint();
  cfg.backoff_base_s = 0.5;
  ChatClient client(cfg, sleeper());
  const auto r = client.complete({{"user", "hi"}});
  EXPECT_EQ(r.attempts, 3);
  EXPECT_EQ(stub.calls_.load(), 3);
  EXPECT_EQ(sleeps_, (std::vector<double>{0.5, 1.0}));
}

TEST_F(ChatClientTest, GivesUpAfterMaxAttempts) {
  StubServer stub;
  stub.plan_ = {500, 500, 500, 500};
  ChatClient client(stub.endpoint(), sleeper());
  EXPECT_THROW(client.complete({{"user", "hi"}}), BackendError);
  EXPECT_EQ(stub.calls_.load(), 3);
}

TEST_F(ChatClientTest, NonRetryableStatusFailsImmediately) {
  StubServer stub;
  stub.plan_ = {400};
  ChatClient client(stub.endpoint(), sleeper());
  EXPECT_THROW(client.complete({{"user", "hi"}}), BackendError);
  EXPECT_EQ(stub.calls_.load(), 1);
}

TEST_F(ChatClientTest, MalformedPayloadIsBackendError) {
  StubServer stub;
  stub.body_ = "{\"choices\": []}";
  ChatClient client(stub.endpoint(), sleeper());
  EXPECT_THROW(client.complete({{"user", "hi"}}), BackendError);
  stub.body_ = "not json";
  EXPECT_THROW(client.complete({{"user", "hi"}}), BackendError);
}

TEST_F(ChatClientTest, UnreachableHostIsBackendError) {
  EndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:1/v1";
  cfg.model = "m";
  cfg.max_attempts = 2;
  cfg.timeout_s = 2;
  ChatClient client(cfg, sleeper());
  EXPECT_THROW(client.complete({{"user", "hi"}}), BackendError);
  EXPECT_EQ(sleeps_.size(), 1u);
}

TEST_F(ChatClientTest, PreflightCapBlocksOversizedRequest) {
  StubServer stub;
  auto cfg = stub.endpoint();
  cfg.max_context_words = 3;
  ChatClient client(cfg, sleeper());
  EXPECT_THROW(client.complete({{"user", "one two three four"}}), BackendError);
  EXPECT_EQ(stub.calls_.load(), 0);
  EXPECT_NO_THROW(client.complete({{"user", "one two three"}}));
}

TEST_F(ChatClientTest, RemoteSummarizerSendsCompactionPrompt) {
  StubServer stub;
  stub.reply_ = "summary";
  RemoteSummarizer s(stub.endpoint(), sleeper());
  EXPECT_EQ(s.summarize("Budget is $309.", 200, PromptKind::careful), "summary");
  const auto body = nlohmann::json::parse(stub.last_body_);
  const std::string sent = body["messages"][0]["content"];
  EXPECT_NE(sent.find("Every specific budget figure"), std::string::npos);
  EXPECT_NE(sent.find("Budget is $309."), std::string::npos);
}

TEST(EndpointConfig, ValidationAndJson) {
  EndpointConfig c;
  EXPECT_THROW(c.validate(), ConfigError);
  c.base_url = "http://localhost:8000/v1";
  c.model = "m";
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(EndpointConfig::from_json(c.to_json()), c);
  c.max_attempts = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}
