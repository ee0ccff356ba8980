#pragma once
// Responders: the built-in oracle and an OpenAI-style chat-completion client
// with retries and rate limiting, plus self-consistency voting.

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kc/kg_store.hpp"
#include "kc/problem_io.hpp"
#include "kc/prompt.hpp"

namespace kc {

struct RetryPolicy {
  std::size_t max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_factor = 2.0;
  std::chrono::milliseconds max_backoff{16000};

  std::chrono::milliseconds backoff(std::size_t retry) const;  // retry >= 1
};

struct RateLimit {
  std::size_t requests = 0;  // 0 = unlimited
  std::chrono::milliseconds interval{60000};
};

struct ResponderConfig {
  std::string endpoint;  // base URL, e.g. http://localhost:8000/v1
  std::string model;
  double temperature = 0.1;
  std::size_t sample_count = 1;
  std::size_t max_tokens = 1024;
  std::chrono::milliseconds timeout{120000};
  RetryPolicy retry;
  RateLimit rate_limit;
  std::string api_key;  // filled from KC_API_KEY when empty

  // Throws Error on sample_count == 0, negative temperature or max_attempts == 0.
  void validate() const;
  // Five samples at 0.7 as used for self-consistency.
  static ResponderConfig self_consistency_defaults();
};

class Clock {
 public:
  using time_point = std::chrono::steady_clock::time_point;
  virtual ~Clock() = default;
  virtual time_point now() = 0;
  virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock final : public Clock {
 public:
  time_point now() override { return std::chrono::steady_clock::now(); }
  void sleep_for(std::chrono::milliseconds d) override;
};

// Sliding-window limiter: at most `requests` acquisitions in any window of
// `interval`. Thread-safe.
class RateLimiter {
 public:
  RateLimiter(RateLimit limit, Clock& clock) : limit_(limit), clock_(clock) {}
  void acquire();

 private:
  RateLimit limit_;
  Clock& clock_;
  std::mutex mu_;
  std::deque<Clock::time_point> issued_;
};

struct TransportStats {
  std::size_t calls = 0;      // respond() invocations
  std::size_t requests = 0;   // HTTP attempts
  std::size_t retries = 0;
  std::size_t failures = 0;   // calls that ended in TransportError
  std::size_t overflows = 0;  // calls that ended in ContextOverflowError
  std::map<int, std::size_t> status_counts;  // 0 = connection error

  friend bool operator==(const TransportStats&, const TransportStats&) = default;
};

class Responder {
 public:
  virtual ~Responder() = default;
  // Returns sample_count() completions for `prompt`. `target` is the problem
  // the prompt was rendered for. Throws TransportError or ContextOverflowError.
  virtual std::vector<std::string> respond(const std::string& prompt, const Problem& target) = 0;
  virtual std::size_t sample_count() const = 0;
};

// Writes the gold answer in the requested style, solving against `verifier`
// (or each problem's gold knowledge when null).
class OracleResponder final : public Responder {
 public:
  explicit OracleResponder(Style style, std::size_t samples = 1, const KnowledgeGraph* verifier = nullptr,
                           std::size_t verify_all_retries = 1);
  std::vector<std::string> respond(const std::string& prompt, const Problem& target) override;
  std::size_t sample_count() const override { return samples_; }

 private:
  Style style_;
  std::size_t samples_;
  const KnowledgeGraph* verifier_;
  std::size_t retries_;
};

// Raw HTTP exchange, replaceable in tests.
struct HttpReply {
  int status = 0;  // 0 = connection failure
  std::string body;
  std::optional<std::chrono::milliseconds> retry_after;
};

using HttpPost = std::function<HttpReply(const std::string& path, const std::string& body)>;

class ChatCompletionResponder final : public Responder {
 public:
  // Talks to cfg.endpoint over HTTP(S).
  ChatCompletionResponder(ResponderConfig cfg, Clock& clock);
  // Uses `post` instead of a network client.
  ChatCompletionResponder(ResponderConfig cfg, Clock& clock, HttpPost post);

  std::vector<std::string> respond(const std::string& prompt, const Problem& target) override;
  std::size_t sample_count() const override { return cfg_.sample_count; }

  TransportStats stats() const;
  // Request body for one call asking for `n` completions.
  std::string request_body(const std::string& prompt, std::size_t n) const;

 private:
  std::vector<std::string> call(const std::string& prompt, std::size_t n);

  ResponderConfig cfg_;
  Clock& clock_;
  HttpPost post_;
  std::string path_;
  RateLimiter limiter_;
  mutable std::mutex stats_mu_;
  TransportStats stats_;
};

// Per-blank plurality over answered blanks, ties to the earliest sample;
// nota_claimed by strict majority.
ParsedAnswer self_consistency(std::span<const ParsedAnswer> parses);

}  // namespace kc
