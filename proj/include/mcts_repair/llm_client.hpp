#pragma once

// Chat-completion client for OpenAI-compatible endpoints.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcts_repair/core.hpp"

namespace mcts_repair {

inline constexpr const char* kApiKeyEnv = "MCTS_REPAIR_API_KEY";

struct ChatMessage {
  std::string role;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.9;
  int max_tokens = 8000;
  std::optional<std::uint64_t> seed;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t total_tokens = 0;
  bool estimated = false;  // provider omitted usage; counts come from estimate_tokens

  bool operator==(const Usage&) const = default;
};

struct ChatResult {
  std::string text;
  Usage usage;
  int attempts = 1;
};

/// Rough token count used only when a provider omits usage: ceil(bytes / 4).
std::int64_t estimate_tokens(std::string_view text);

/// Money for a token count at a per-1k-token price.
double cost(std::int64_t tokens_total, double price_per_1k);

// ─── Transport ────────────────────────────────────────────────

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Connection-level failure (refused, reset, timed out).
class TransportError : public Error {
 public:
  using Error::Error;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;

  /// POSTs a JSON body to `path` (relative to the endpoint's base URL).
  /// Throws TransportError when no HTTP response was received.
  virtual HttpResponse post(const std::string& path, const std::string& body,
                            const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

/// cpp-httplib transport. base_url is e.g. "https://api.openai.com/v1".
class HttpTransport : public ChatTransport {
 public:
  HttpTransport(std::string base_url, std::chrono::milliseconds timeout);

  HttpResponse post(const std::string& path, const std::string& body,
                    const std::vector<std::pair<std::string, std::string>>& headers) override;

 private:
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::chrono::milliseconds timeout_;
};

/// Deterministic in-process transport for tests: replays a scripted queue of
/// replies and records every request body.
class StubTransport : public ChatTransport {
 public:
  struct Reply {
    int status = 200;
    std::string body;
    bool connection_error = false;
  };

  static Reply ok(std::string_view content, std::optional<std::pair<int, int>> usage);
  static Reply http_error(int status);
  static Reply connection_failure();

  void push(Reply reply);
  /// Reply used once the queue is empty; unset means connection failure.
  void set_default(Reply reply);

  HttpResponse post(const std::string& path, const std::string& body,
                    const std::vector<std::pair<std::string, std::string>>& headers) override;

  std::vector<std::string> request_bodies() const;
  std::size_t request_count() const;

 private:
  mutable std::mutex mu_;
  std::deque<Reply> queue_;
  std::optional<Reply> default_;
  std::vector<std::string> bodies_;
};

// ─── Client ───────────────────────────────────────────────────

struct ClientOptions {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  std::string api_key;
  std::chrono::milliseconds request_timeout{120'000};
  int max_attempts = 5;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_cap{16'000};
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
  std::function<void(std::string_view)> log;              // retry diagnostics; may be empty
};

/// Running totals across every call made through a client.
class UsageLedger {
 public:
  void add(const Usage& usage, int attempts);

  std::int64_t prompt_tokens() const { return prompt_.load(); }
  std::int64_t completion_tokens() const { return completion_.load(); }
  std::int64_t total_tokens() const { return prompt_.load() + completion_.load(); }
  std::int64_t calls() const { return calls_.load(); }
  std::int64_t attempts() const { return attempts_.load(); }

 private:
  std::atomic<std::int64_t> prompt_{0};
  std::atomic<std::int64_t> completion_{0};
  std::atomic<std::int64_t> calls_{0};
  std::atomic<std::int64_t> attempts_{0};
};

class ChatClient {
 public:
  ChatClient(ClientOptions options, std::shared_ptr<ChatTransport> transport);

  /// Options from arguments plus the API key from MCTS_REPAIR_API_KEY,
  /// talking HTTP. Throws InvalidConfig when the key is missing.
  static std::shared_ptr<ChatClient> from_environment(std::string base_url, std::string model);

  /// Sends one completion request. Connection errors, HTTP 429 and 5xx are
  /// retried with exponential backoff up to max_attempts; other statuses
  /// fail immediately. Throws BackendUnavailable or MalformedResponse.
  ChatResult chat(const ChatRequest& request);

  const ClientOptions& options() const { return options_; }
  const UsageLedger& ledger() const { return ledger_; }

  static std::string request_body(const ChatRequest& request);
  /// Parses a chat/completions response body; usage falls back to estimates.
  static ChatResult parse_response(const std::string& body, const ChatRequest& request);

 private:
  ClientOptions options_;
  std::shared_ptr<ChatTransport> transport_;
  UsageLedger ledger_;
};

}  // namespace mcts_repair
