#pragma once

#include <chrono>
#include <cstdlib>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dispute/util.hpp"

namespace dispute {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string text;
};

class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-retryable: bad or missing credential.
class AuthError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// Retryable: rate limits, 5xx, timeouts.
class TransientError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class RateLimitError : public TransientError {
 public:
  using TransientError::TransientError;
};

class MalformedResponseError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

struct ProviderConfig {
  std::string provider_id = "mock";
  std::string model;
  std::string endpoint;                 // full chat-completion URL
  std::string credential_env;           // defaults to DISPUTEBENCH_<ID>_KEY
  double temperature = 1.0;
  std::optional<double> top_p;          // provider default when unset
  int max_retries = 3;
  double timeout_seconds = 60.0;

  std::string credential_variable() const {
    if (!credential_env.empty()) return credential_env;
    std::string id = provider_id;
    for (auto& c : id)
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    return "DISPUTEBENCH_" + id + "_KEY";
  }

  void validate() const {
    if (temperature < 0) throw std::invalid_argument("temperature must be >= 0");
    if (max_retries < 0) throw std::invalid_argument("max retries must be >= 0");
  }
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

struct CompletionResult {
  std::string text;
  int attempts = 1;
};

// Retries transient failures with exponential backoff. Auth failures are
// surfaced immediately with zero retries.
inline CompletionResult complete_with_retries(
    ChatProvider& provider, const std::vector<ChatMessage>& messages, int max_retries,
    std::function<void(int attempt, const std::string& note)> log = nullptr,
    std::function<void(std::chrono::milliseconds)> sleeper = nullptr,
    std::chrono::milliseconds base_backoff = std::chrono::milliseconds(500)) {
  if (!sleeper) sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  int attempt = 0;
  for (;;) {
    ++attempt;
    try {
      std::string text = provider.complete(messages);
      if (log) log(attempt, "ok");
      return {std::move(text), attempt};
    } catch (const AuthError&) {
      throw;
    } catch (const TransientError& e) {
      if (log) log(attempt, e.what());
      if (attempt > max_retries) throw;
      sleeper(base_backoff * (1 << (attempt - 1)));
    }
  }
}

// Test and offline fixture: canned replies, optional echo, optional injected
// transient failures before the first success.
class MockChatProvider : public ChatProvider {
 public:
  std::vector<std::string> replies;
  bool echo_last = false;
  int transient_failures = 0;
  bool fail_auth = false;
  int calls = 0;

  std::string complete(const std::vector<ChatMessage>& messages) override {
    ++calls;
    if (fail_auth) throw AuthError("mock: invalid credential");
    if (transient_failures > 0) {
      --transient_failures;
      throw TransientError("mock: injected 5xx");
    }
    if (echo_last) return messages.empty() ? "" : messages.back().text;
    if (replies.empty()) return "OK";
    const std::size_t idx = std::min<std::size_t>(next_++, replies.size() - 1);
    return replies[idx];
  }

 private:
  std::size_t next_ = 0;
};

// OpenAI-compatible chat-completion HTTP client. Other providers are mapped
// behind the same interface via their compatibility endpoints.
class HttpChatProvider : public ChatProvider {
 public:
  explicit HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {
    config_.validate();
    const char* key = std::getenv(config_.credential_variable().c_str());
    if (key == nullptr || std::string(key).empty())
      throw AuthError("missing credential in $" + config_.credential_variable());
    api_key_ = key;
  }

  std::string complete(const std::vector<ChatMessage>& messages) override;

 private:
  ProviderConfig config_;
  std::string api_key_;
};

}  // namespace dispute

#ifdef DISPUTE_ENABLE_HTTP
#include <httplib.h>

namespace dispute {

inline std::string HttpChatProvider::complete(const std::vector<ChatMessage>& messages) {
  nlohmann::json payload;
  payload["model"] = config_.model;
  payload["temperature"] = config_.temperature;
  if (config_.top_p) payload["top_p"] = *config_.top_p;
  payload["messages"] = nlohmann::json::array();
  for (const auto& m : messages)
    payload["messages"].push_back({{"role", m.role}, {"content", m.text}});

  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos)
    throw std::invalid_argument("endpoint must be a full URL: " + config_.endpoint);
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  const std::string base = path_start == std::string::npos ? config_.endpoint
                                                           : config_.endpoint.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/"
                                                           : config_.endpoint.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(static_cast<time_t>(config_.timeout_seconds), 0);
  client.set_read_timeout(static_cast<time_t>(config_.timeout_seconds), 0);
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
  auto res = client.Post(path, headers, payload.dump(), "application/json");
  if (!res) throw TransientError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403)
    throw AuthError("provider rejected credential (HTTP " + std::to_string(res->status) + ")");
  if (res->status == 429) throw RateLimitError("rate limited");
  if (res->status >= 500)
    throw TransientError("provider error HTTP " + std::to_string(res->status));
  if (res->status != 200)
    throw ProviderError("unexpected HTTP " + std::to_string(res->status) + ": " + res->body);
  try {
    const auto body = nlohmann::json::parse(res->body);
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponseError(std::string("cannot parse provider response: ") + e.what());
  }
}

}  // namespace dispute
#else
namespace dispute {
inline std::string HttpChatProvider::complete(const std::vector<ChatMessage>&) {
  throw ProviderError("HTTP support not compiled in (DISPUTE_ENABLE_HTTP)");
}
}  // namespace dispute
#endif
