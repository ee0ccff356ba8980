#pragma once

#include <mutex>
#include <vector>

#include "kc/llm_client.hpp"

namespace kc::testing {

// Time only moves when someone sleeps.
class FakeClock final : public Clock {
 public:
  time_point now() override {
    std::lock_guard lock(mu_);
    return now_;
  }
  void sleep_for(std::chrono::milliseconds d) override {
    std::lock_guard lock(mu_);
    now_ += d;
    sleeps_.push_back(d);
  }
  std::vector<std::chrono::milliseconds> sleeps() const {
    std::lock_guard lock(mu_);
    return sleeps_;
  }

 private:
  mutable std::mutex mu_;
  time_point now_{};
  std::vector<std::chrono::milliseconds> sleeps_;
};

inline std::string completion_body(const std::vector<std::string>& texts, const std::string& finish = "stop") {
  nlohmann::json j;
  j["choices"] = nlohmann::json::array();
  for (const auto& t : texts) j["choices"].push_back({{"message", {{"role", "assistant"}, {"content", t}}}, {"finish_reason", finish}});
  return j.dump();
}

}  // namespace kc::testing
