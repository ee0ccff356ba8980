#include <gtest/gtest.h>

#include <deque>

#include "fake_clock.hpp"
#include "fixtures.hpp"
#include "kc/error.hpp"
#include "kc/llm_client.hpp"

namespace kc {
namespace {

using namespace std::chrono_literals;
using testing::completion_body;
using testing::FakeClock;

// Replays scripted replies and records what was sent.
struct Script {
  std::deque<HttpReply> replies;
  std::vector<std::pair<std::string, std::string>> sent;

  HttpPost post() {
    return [this](const std::string& path, const std::string& body) {
      sent.emplace_back(path, body);
      if (replies.empty()) return HttpReply{500, "script exhausted", std::nullopt};
      auto r = replies.front();
      replies.pop_front();
      return r;
    };
  }
};

ResponderConfig config() {
  ResponderConfig c;
  c.endpoint = "http://localhost:9/v1/";
  c.model = "test-model";
  return c;
}

TEST(LlmClient, RetriesTransientStatusesWithBackoff) {
  FakeClock clock;
  Script s;
  s.replies = {{429, "slow down", std::nullopt}, {503, "busy", std::nullopt}, {200, completion_body({"blank 1: B"}), std::nullopt}};
  ChatCompletionResponder r(config(), clock, s.post());
  const auto out = r.respond("prompt", testing::true_lies_problem());
  EXPECT_EQ(out, std::vector<std::string>{"blank 1: B"});
  const auto st = r.stats();
  EXPECT_EQ(st.calls, 1u);
  EXPECT_EQ(st.requests, 3u);
  EXPECT_EQ(st.retries, 2u);
  EXPECT_EQ(st.failures, 0u);
  EXPECT_EQ(st.status_counts.at(429), 1u);
  EXPECT_EQ(st.status_counts.at(503), 1u);
  EXPECT_EQ(st.status_counts.at(200), 1u);
  EXPECT_EQ(clock.sleeps(), (std::vector<std::chrono::milliseconds>{500ms, 1000ms}));
  ASSERT_EQ(s.sent.size(), 3u);
  EXPECT_EQ(s.sent[0].first, "/v1/chat/completions");
}

TEST(LlmClient, RetryAfterHonouredUpToCap) {
  FakeClock clock;
  Script s;
  s.replies = {{429, "", 3000ms}, {429, "", 60000ms}, {200, completion_body({"x"}), std::nullopt}};
  ChatCompletionResponder r(config(), clock, s.post());
  r.respond("p", testing::true_lies_problem());
  EXPECT_EQ(clock.sleeps(), (std::vector<std::chrono::milliseconds>{3000ms, 16000ms}));
}

TEST(LlmClient, ExhaustedRetriesThrowTransportError) {
  FakeClock clock;
  Script s;
  for (int i = 0; i < 5; ++i) s.replies.push_back({500, "oops", std::nullopt});
  ChatCompletionResponder r(config(), clock, s.post());
  try {
    r.respond("p", testing::true_lies_problem());
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 500);
  }
  const auto st = r.stats();
  EXPECT_EQ(st.requests, 5u);
  EXPECT_EQ(st.retries, 4u);
  EXPECT_EQ(st.failures, 1u);
}

TEST(LlmClient, ClientErrorsAreNotRetried) {
  FakeClock clock;
  Script s;
  s.replies = {{401, "bad key", std::nullopt}};
  ChatCompletionResponder r(config(), clock, s.post());
  EXPECT_THROW(r.respond("p", testing::true_lies_problem()), TransportError);
  EXPECT_EQ(r.stats().requests, 1u);
  EXPECT_TRUE(clock.sleeps().empty());
}

TEST(LlmClient, ConnectionFailuresAreRetried) {
  FakeClock clock;
  Script s;
  s.replies = {{0, "", std::nullopt}, {200, completion_body({"ok"}), std::nullopt}};
  ChatCompletionResponder r(config(), clock, s.post());
  EXPECT_EQ(r.respond("p", testing::true_lies_problem()).front(), "ok");
  EXPECT_EQ(r.stats().status_counts.at(0), 1u);
}

TEST(LlmClient, ContextOverflowDetected) {
  FakeClock clock;
  Script s;
  s.replies = {{400, R"({"error":{"code":"context_length_exceeded"}})", std::nullopt},
               {200, completion_body({"partial"}, "length"), std::nullopt}};
  ChatCompletionResponder r(config(), clock, s.post());
  EXPECT_THROW(r.respond("p", testing::true_lies_problem()), ContextOverflowError);
  EXPECT_THROW(r.respond("p", testing::true_lies_problem()), ContextOverflowError);
  EXPECT_EQ(r.stats().overflows, 2u);
}

TEST(LlmClient, TopsUpMissingChoices) {
  FakeClock clock;
  Script s;
  s.replies = {{200, completion_body({"a", "b"}), std::nullopt}, {200, completion_body({"c"}), std::nullopt}};
  auto cfg = config();
  cfg.sample_count = 3;
  ChatCompletionResponder r(cfg, clock, s.post());
  EXPECT_EQ(r.respond("p", testing::true_lies_problem()), (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(s.sent.size(), 2u);
  EXPECT_EQ(nlohmann::json::parse(s.sent[0].second)["n"], 3);
  EXPECT_EQ(nlohmann::json::parse(s.sent[1].second)["n"], 1);
}

TEST(LlmClient, RequestBodyShape) {
  FakeClock clock;
  Script s;
  auto cfg = config();
  cfg.temperature = 0.7;
  ChatCompletionResponder r(cfg, clock, s.post());
  const auto j = nlohmann::json::parse(r.request_body("hello", 5));
  EXPECT_EQ(j["model"], "test-model");
  EXPECT_EQ(j["messages"][0]["role"], "user");
  EXPECT_EQ(j["messages"][0]["content"], "hello");
  EXPECT_DOUBLE_EQ(j["temperature"].get<double>(), 0.7);
  EXPECT_EQ(j["n"], 5);
}

TEST(LlmClient, MalformedBodyIsTransportError) {
  FakeClock clock;
  Script s;
  s.replies = {{200, "not json", std::nullopt}, {200, R"({"choices": []})", std::nullopt}};
  ChatCompletionResponder r(config(), clock, s.post());
  EXPECT_THROW(r.respond("p", testing::true_lies_problem()), TransportError);
  EXPECT_THROW(r.respond("p", testing::true_lies_problem()), TransportError);
}

TEST(LlmClient, RateLimiterSpacesRequests) {
  FakeClock clock;
  RateLimiter limiter({2, 1000ms}, clock);
  const auto start = clock.now();
  for (int i = 0; i < 5; ++i) limiter.acquire();
  // Acquisitions at 0, 0, 1000, 1000, 2000.
  EXPECT_EQ(clock.now() - start, 2000ms);

  FakeClock other;
  RateLimiter unlimited({0, 1000ms}, other);
  for (int i = 0; i < 100; ++i) unlimited.acquire();
  EXPECT_TRUE(other.sleeps().empty());
}

TEST(LlmClient, ConfigValidation) {
  auto c = config();
  c.sample_count = 0;
  EXPECT_THROW(c.validate(), Error);
  c = config();
  c.temperature = -1;
  EXPECT_THROW(c.validate(), Error);
  c = config();
  c.retry.max_attempts = 0;
  EXPECT_THROW(c.validate(), Error);
  const auto sc = ResponderConfig::self_consistency_defaults();
  EXPECT_EQ(sc.sample_count, 5u);
  EXPECT_DOUBLE_EQ(sc.temperature, 0.7);
  EXPECT_DOUBLE_EQ(ResponderConfig{}.temperature, 0.1);
}

TEST(LlmClient, SelfConsistencyVote) {
  using L = std::vector<std::optional<std::size_t>>;
  const std::vector<ParsedAnswer> votes{{L{0, 1}, false}, {L{1, 1}, false}, {L{1, 2}, false},
                                        {L{0, std::nullopt}, true}, {L{2, 2}, false}};
  const auto merged = self_consistency(votes);
  // blank 1: A=2, B=2 -> earliest (A); blank 2: B=2, C=2 -> B.
  EXPECT_EQ(merged.per_blank, (L{0, 1}));
  EXPECT_FALSE(merged.nota_claimed);

  const std::vector<ParsedAnswer> nota{{L{0}, true}, {L{0}, true}, {L{1}, false}};
  EXPECT_TRUE(self_consistency(nota).nota_claimed);
  EXPECT_TRUE(self_consistency({}).per_blank.empty());
}

TEST(LlmClient, OracleResponderAnswersGold) {
  const auto p = testing::dick_powell_problem();
  OracleResponder r(Style::staged, 3);
  const auto out = r.respond("ignored", p);
  ASSERT_EQ(out.size(), 3u);
  for (const auto& text : out) EXPECT_EQ(parse_answer(text, p), gold_answer(p));
}

}  // namespace
}  // namespace kc
