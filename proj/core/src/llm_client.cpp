#include "kc/llm_client.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "kc/error.hpp"

namespace kc {

std::chrono::milliseconds RetryPolicy::backoff(std::size_t retry) const {
  double ms = static_cast<double>(initial_backoff.count());
  for (std::size_t i = 1; i < retry; ++i) ms *= backoff_factor;
  ms = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

void ResponderConfig::validate() const {
  if (sample_count == 0) throw Error("sample_count must be at least 1");
  if (!(temperature >= 0.0)) throw Error("temperature must be non-negative");
  if (retry.max_attempts == 0) throw Error("retry.max_attempts must be at least 1");
}

ResponderConfig ResponderConfig::self_consistency_defaults() {
  ResponderConfig c;
  c.temperature = 0.7;
  c.sample_count = 5;
  return c;
}

void SystemClock::sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

void RateLimiter::acquire() {
  if (limit_.requests == 0) return;
  std::unique_lock lock(mu_);
  for (;;) {
    const auto now = clock_.now();
    while (!issued_.empty() && now - issued_.front() >= limit_.interval) issued_.pop_front();
    if (issued_.size() < limit_.requests) {
      issued_.push_back(now);
      return;
    }
    const auto wait =
        std::chrono::ceil<std::chrono::milliseconds>(issued_.front() + limit_.interval - now);
    // The clock may be shared with other limiters; sleeping under the lock
    // keeps the window accounting exact.
    clock_.sleep_for(std::max(wait, std::chrono::milliseconds(1)));
  }
}

OracleResponder::OracleResponder(Style style, std::size_t samples, const KnowledgeGraph* verifier,
                                 std::size_t verify_all_retries)
    : style_(style), samples_(std::max<std::size_t>(samples, 1)), verifier_(verifier), retries_(verify_all_retries) {}

std::vector<std::string> OracleResponder::respond(const std::string&, const Problem& target) {
  return std::vector<std::string>(samples_, answer_body(target, style_, verifier_, retries_));
}

namespace {

struct EndpointParts {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

EndpointParts split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  const auto host_start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', host_start);
  EndpointParts parts;
  parts.origin = slash == std::string::npos ? url : url.substr(0, slash);
  parts.prefix = slash == std::string::npos ? "" : url.substr(slash);
  while (!parts.prefix.empty() && parts.prefix.back() == '/') parts.prefix.pop_back();
  return parts;
}

HttpPost network_post(const ResponderConfig& cfg) {
  const auto parts = split_endpoint(cfg.endpoint);
  const auto timeout = cfg.timeout;
  std::string key = cfg.api_key;
  if (key.empty()) {
    if (const char* env = std::getenv("KC_API_KEY")) key = env;
  }
  return [origin = parts.origin, timeout, key](const std::string& path, const std::string& body) {
    httplib::Client client(origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    client.set_read_timeout(secs);
    client.set_write_timeout(secs);
    client.set_connection_timeout(std::chrono::seconds(10));
    httplib::Headers headers;
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
    HttpReply reply;
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) return reply;
    reply.status = res->status;
    reply.body = res->body;
    if (res->has_header("Retry-After")) {
      try {
        reply.retry_after = std::chrono::milliseconds(
            static_cast<long long>(std::stod(res->get_header_value("Retry-After")) * 1000.0));
      } catch (const std::exception&) {
      }
    }
    return reply;
  };
}

bool transient(int status) { return status == 0 || status == 429 || status >= 500; }

bool mentions_overflow(const std::string& body) {
  return body.find("context_length_exceeded") != std::string::npos ||
         body.find("maximum context length") != std::string::npos;
}

}  // namespace

ChatCompletionResponder::ChatCompletionResponder(ResponderConfig cfg, Clock& clock)
    : ChatCompletionResponder(cfg, clock, network_post(cfg)) {}

ChatCompletionResponder::ChatCompletionResponder(ResponderConfig cfg, Clock& clock, HttpPost post)
    : cfg_(std::move(cfg)),
      clock_(clock),
      post_(std::move(post)),
      path_(split_endpoint(cfg_.endpoint).prefix + "/chat/completions"),
      limiter_(cfg_.rate_limit, clock) {
  cfg_.validate();
}

TransportStats ChatCompletionResponder::stats() const {
  std::lock_guard lock(stats_mu_);
  return stats_;
}

std::string ChatCompletionResponder::request_body(const std::string& prompt, std::size_t n) const {
  nlohmann::ordered_json j;
  j["model"] = cfg_.model;
  j["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
  j["temperature"] = cfg_.temperature;
  j["n"] = n;
  j["max_tokens"] = cfg_.max_tokens;
  return j.dump();
}

std::vector<std::string> ChatCompletionResponder::respond(const std::string& prompt, const Problem&) {
  {
    std::lock_guard lock(stats_mu_);
    ++stats_.calls;
  }
  std::vector<std::string> out;
  try {
    // Servers may return fewer choices than asked for; top up.
    while (out.size() < cfg_.sample_count) {
      auto got = call(prompt, cfg_.sample_count - out.size());
      for (auto& text : got) {
        if (out.size() < cfg_.sample_count) out.push_back(std::move(text));
      }
    }
  } catch (const ContextOverflowError&) {
    std::lock_guard lock(stats_mu_);
    ++stats_.overflows;
    throw;
  } catch (const TransportError&) {
    std::lock_guard lock(stats_mu_);
    ++stats_.failures;
    throw;
  }
  return out;
}

std::vector<std::string> ChatCompletionResponder::call(const std::string& prompt, std::size_t n) {
  const auto body = request_body(prompt, n);
  HttpReply reply;
  for (std::size_t attempt = 1;; ++attempt) {
    limiter_.acquire();
    reply = post_(path_, body);
    {
      std::lock_guard lock(stats_mu_);
      ++stats_.requests;
      ++stats_.status_counts[reply.status];
    }
    if (reply.status == 200) break;
    if (mentions_overflow(reply.body)) throw ContextOverflowError("prompt exceeds the model context");
    if (!transient(reply.status)) {
      throw TransportError("endpoint returned HTTP " + std::to_string(reply.status) + ": " + reply.body.substr(0, 200),
                           reply.status);
    }
    if (attempt >= cfg_.retry.max_attempts) {
      throw TransportError("retries exhausted after " + std::to_string(attempt) + " attempts (last status " +
                               std::to_string(reply.status) + ")",
                           reply.status);
    }
    {
      std::lock_guard lock(stats_mu_);
      ++stats_.retries;
    }
    auto wait = cfg_.retry.backoff(attempt);
    if (reply.retry_after) wait = std::min(std::max(wait, *reply.retry_after), cfg_.retry.max_backoff);
    clock_.sleep_for(wait);
  }

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply.body);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed completion response: ") + e.what(), reply.status);
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw TransportError("completion response has no choices", reply.status);
  }
  std::vector<std::string> texts;
  for (const auto& choice : j["choices"]) {
    if (choice.value("finish_reason", std::string()) == "length") {
      throw ContextOverflowError("completion truncated at the token limit");
    }
    const auto msg = choice.find("message");
    if (msg == choice.end() || !msg->contains("content") || !(*msg)["content"].is_string()) {
      throw TransportError("completion choice has no message content", reply.status);
    }
    texts.push_back((*msg)["content"].get<std::string>());
  }
  return texts;
}

ParsedAnswer self_consistency(std::span<const ParsedAnswer> parses) {
  ParsedAnswer out;
  if (parses.empty()) return out;
  std::size_t blanks = 0;
  std::size_t nota_votes = 0;
  for (const auto& p : parses) {
    blanks = std::max(blanks, p.per_blank.size());
    nota_votes += p.nota_claimed ? 1 : 0;
  }
  out.per_blank.assign(blanks, std::nullopt);
  for (std::size_t b = 0; b < blanks; ++b) {
    // (option, votes) in order of first appearance, so the earliest wins ties.
    std::vector<std::pair<std::size_t, std::size_t>> tally;
    for (const auto& p : parses) {
      if (b >= p.per_blank.size() || !p.per_blank[b]) continue;
      const auto opt = *p.per_blank[b];
      auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& t) { return t.first == opt; });
      if (it == tally.end()) {
        tally.emplace_back(opt, 1);
      } else {
        ++it->second;
      }
    }
    std::optional<std::pair<std::size_t, std::size_t>> best;
    for (const auto& t : tally) {
      if (!best || t.second > best->second) best = t;
    }
    if (best) out.per_blank[b] = best->first;
  }
  out.nota_claimed = 2 * nota_votes > parses.size();
  return out;
}

}  // namespace kc
