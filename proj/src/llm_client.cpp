#include "mcts_repair/llm_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <json.hpp>

namespace mcts_repair {

using json = nlohmann::json;

std::int64_t estimate_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

double cost(std::int64_t tokens_total, double price_per_1k) {
  return static_cast<double>(tokens_total) / 1000.0 * price_per_1k;
}

// ─── StubTransport ────────────────────────────────────────────

StubTransport::Reply StubTransport::ok(std::string_view content,
                                       std::optional<std::pair<int, int>> usage) {
  json body = {{"id", "stub"},
               {"object", "chat.completion"},
               {"choices",
                {{{"index", 0},
                  {"message", {{"role", "assistant"}, {"content", content}}},
                  {"finish_reason", "stop"}}}}};
  if (usage) {
    body["usage"] = {{"prompt_tokens", usage->first},
                     {"completion_tokens", usage->second},
                     {"total_tokens", usage->first + usage->second}};
  }
  return Reply{200, body.dump(), false};
}

StubTransport::Reply StubTransport::http_error(int status) {
  json body = {{"error", {{"message", "stub error"}, {"code", status}}}};
  return Reply{status, body.dump(), false};
}

StubTransport::Reply StubTransport::connection_failure() { return Reply{0, {}, true}; }

void StubTransport::push(Reply reply) {
  std::lock_guard lock(mu_);
  queue_.push_back(std::move(reply));
}

void StubTransport::set_default(Reply reply) {
  std::lock_guard lock(mu_);
  default_ = std::move(reply);
}

HttpResponse StubTransport::post(const std::string&, const std::string& body,
                                 const std::vector<std::pair<std::string, std::string>>&) {
  Reply reply;
  {
    std::lock_guard lock(mu_);
    bodies_.push_back(body);
    if (!queue_.empty()) {
      reply = std::move(queue_.front());
      queue_.pop_front();
    } else if (default_) {
      reply = *default_;
    } else {
      reply = connection_failure();
    }
  }
  if (reply.connection_error) throw TransportError("stub: connection refused");
  return HttpResponse{reply.status, std::move(reply.body)};
}

std::vector<std::string> StubTransport::request_bodies() const {
  std::lock_guard lock(mu_);
  return bodies_;
}

std::size_t StubTransport::request_count() const {
  std::lock_guard lock(mu_);
  return bodies_.size();
}

// ─── UsageLedger ──────────────────────────────────────────────

void UsageLedger::add(const Usage& usage, int attempts) {
  prompt_.fetch_add(usage.prompt_tokens);
  completion_.fetch_add(usage.completion_tokens);
  calls_.fetch_add(1);
  attempts_.fetch_add(attempts);
}

// ─── ChatClient ───────────────────────────────────────────────

ChatClient::ChatClient(ClientOptions options, std::shared_ptr<ChatTransport> transport)
    : options_(std::move(options)), transport_(std::move(transport)) {
  if (!transport_) throw InvalidConfig("chat client needs a transport");
  if (options_.max_attempts < 1) options_.max_attempts = 1;
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::shared_ptr<ChatClient> ChatClient::from_environment(std::string base_url, std::string model) {
  const char* key = std::getenv(kApiKeyEnv);
  if (!key || !*key) {
    throw InvalidConfig(std::string("environment variable ") + kApiKeyEnv + " is not set");
  }
  ClientOptions options;
  options.base_url = std::move(base_url);
  options.model = std::move(model);
  options.api_key = key;
  auto transport = std::make_shared<HttpTransport>(options.base_url, options.request_timeout);
  return std::make_shared<ChatClient>(std::move(options), std::move(transport));
}

std::string ChatClient::request_body(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  json body = {{"model", request.model},
               {"messages", std::move(messages)},
               {"temperature", request.temperature},
               {"max_tokens", request.max_tokens}};
  if (request.seed) body["seed"] = *request.seed;
  return body.dump();
}

ChatResult ChatClient::parse_response(const std::string& body, const ChatRequest& request) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw MalformedResponse(std::string("response is not JSON: ") + e.what());
  }
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw MalformedResponse("response has no choices");
  }
  const auto& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw MalformedResponse("first choice has no string message.content");
  }

  ChatResult result;
  result.text = first["message"]["content"].get<std::string>();

  const auto usage = j.find("usage");
  const bool has_usage = usage != j.end() && usage->is_object() &&
                         usage->contains("prompt_tokens") &&
                         usage->contains("completion_tokens") &&
                         (*usage)["prompt_tokens"].is_number_integer() &&
                         (*usage)["completion_tokens"].is_number_integer();
  if (has_usage) {
    result.usage.prompt_tokens = (*usage)["prompt_tokens"].get<std::int64_t>();
    result.usage.completion_tokens = (*usage)["completion_tokens"].get<std::int64_t>();
  } else {
    std::int64_t prompt = 0;
    for (const auto& m : request.messages) prompt += estimate_tokens(m.content);
    result.usage.prompt_tokens = prompt;
    result.usage.completion_tokens = estimate_tokens(result.text);
    result.usage.estimated = true;
  }
  result.usage.total_tokens = result.usage.prompt_tokens + result.usage.completion_tokens;
  return result;
}

ChatResult ChatClient::chat(const ChatRequest& request) {
  if (request.messages.empty()) throw InvalidConfig("chat request has no messages");
  if (request.temperature < 0) throw InvalidConfig("chat request temperature < 0");

  ChatRequest effective = request;
  if (effective.model.empty()) effective.model = options_.model;
  const std::string body = request_body(effective);
  std::vector<std::pair<std::string, std::string>> headers;
  if (!options_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + options_.api_key);

  std::string last_error;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    if (attempt > 1) {
      const auto delay = std::min<std::chrono::milliseconds>(
          options_.backoff_base * (1LL << std::min(attempt - 2, 20)), options_.backoff_cap);
      if (options_.log) {
        options_.log("chat: attempt " + std::to_string(attempt) + "/" +
                     std::to_string(options_.max_attempts) + " after " + last_error);
      }
      options_.sleep(std::chrono::duration_cast<std::chrono::milliseconds>(delay));
    }

    HttpResponse response;
    try {
      response = transport_->post("/chat/completions", body, headers);
    } catch (const TransportError& e) {
      last_error = e.what();
      continue;
    }

    if (response.status == 429 || response.status >= 500) {
      last_error = "HTTP " + std::to_string(response.status);
      continue;
    }
    if (response.status < 200 || response.status >= 300) {
      throw BackendUnavailable("chat endpoint returned HTTP " + std::to_string(response.status) +
                               " (not retried): " + response.body.substr(0, 512));
    }

    ChatResult result = parse_response(response.body, effective);
    result.attempts = attempt;
    ledger_.add(result.usage, attempt);
    if (options_.log && attempt > 1) {
      options_.log("chat: succeeded after " + std::to_string(attempt) + " attempts");
    }
    return result;
  }
  throw BackendUnavailable("chat endpoint unavailable after " +
                           std::to_string(options_.max_attempts) + " attempts: " + last_error);
}

}  // namespace mcts_repair
