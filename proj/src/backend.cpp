#include "mcts_repair/backend.hpp"

#include <cmath>
#include <fstream>

#include "mcts_repair/prompts.hpp"

namespace mcts_repair {

using json = nlohmann::json;

std::string_view to_string(CallPurpose p) {
  switch (p) {
    case CallPurpose::repair: return "repair";
    case CallPurpose::reflect: return "reflect";
    case CallPurpose::judge: return "judge";
  }
  return "?";
}

std::string fence(std::string_view code) {
  std::string out = "```\n";
  out += code;
  if (!code.empty() && code.back() != '\n') out += '\n';
  out += "```";
  return out;
}

// ─── LiveBackend ──────────────────────────────────────────────

LiveBackend::LiveBackend(std::shared_ptr<ChatClient> client) : client_(std::move(client)) {
  if (!client_) throw InvalidConfig("live backend needs a client");
}

Completion LiveBackend::complete(std::span<const ChatMessage> messages, const CallSite&,
                                 const SamplingParams& params) {
  ChatRequest request;
  request.model = client_->options().model;
  request.messages.assign(messages.begin(), messages.end());
  request.temperature = params.temperature;
  request.max_tokens = params.max_tokens;
  request.seed = params.seed;
  auto result = client_->chat(request);
  return Completion{std::move(result.text), result.usage};
}

// ─── ScriptedBackend ──────────────────────────────────────────

namespace {

std::optional<std::string> optional_text(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

std::vector<json> score_list(const json& j, const char* key) {
  std::vector<json> out;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) throw json::type_error::create(302, std::string(key) + " must be an array", &j);
  for (const auto& v : *it) {
    if (!v.is_number() && !v.is_string()) {
      throw json::type_error::create(302, std::string(key) + " entries must be numbers or strings", &j);
    }
    out.push_back(v);
  }
  return out;
}

std::string render_score(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  const double score = v.get<double>();
  std::string number = (std::floor(score) == score && std::abs(score) < 1e15)
                           ? std::to_string(static_cast<long long>(score))
                           : v.dump();
  return "Assessment of the candidate patch against the failing tests.\n" + number;
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::map<std::string, Response> responses)
    : responses_(std::move(responses)) {}

std::string ScriptedBackend::key(std::string_view bug_id, NodeId parent, int expansion) {
  return std::string(bug_id) + "/" + std::to_string(parent) + "/" + std::to_string(expansion);
}

ScriptedBackend ScriptedBackend::from_json(const json& fixture) {
  ScriptedBackend backend;
  const json& responses = fixture.at("responses");
  for (const auto& [k, entry] : responses.items()) {
    Response r;
    r.cot = entry.value("cot", std::string());
    r.draft = optional_text(entry, "draft");
    r.reflection = entry.value("reflection", std::string());
    r.final_patch = optional_text(entry, "final");
    r.judge = score_list(entry, "judge");
    r.judge_reask = score_list(entry, "judge_reask");
    backend.responses_.emplace(k, std::move(r));
  }
  if (auto it = fixture.find("usage_per_call"); it != fixture.end() && !it->is_null()) {
    backend.set_usage_per_call(it->at("prompt_tokens").get<std::int64_t>(),
                               it->at("completion_tokens").get<std::int64_t>());
  }
  return backend;
}

ScriptedBackend ScriptedBackend::from_file(const fs::path& path) {
  try {
    std::ifstream in(path);
    if (!in) throw MalformedEntry("cannot open fixture " + path.string());
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw MalformedEntry(path.string() + ": " + e.what());
  }
}

void ScriptedBackend::set_response(const std::string& key, Response response) {
  std::lock_guard lock(*mu_);
  responses_[key] = std::move(response);
}

void ScriptedBackend::set_usage_per_call(std::int64_t prompt_tokens, std::int64_t completion_tokens) {
  std::lock_guard lock(*mu_);
  usage_per_call_ = std::make_pair(prompt_tokens, completion_tokens);
}

const ScriptedBackend::Response* ScriptedBackend::lookup(const CallSite& site) const {
  const std::string parent = std::to_string(site.parent_node);
  const std::string expansion = std::to_string(site.expansion_index);
  for (const auto& k : {key(site.bug_id, site.parent_node, site.expansion_index),
                        site.bug_id + "/" + parent + "/*", site.bug_id + "/*/" + expansion,
                        site.bug_id + "/*/*"}) {
    if (const auto it = responses_.find(k); it != responses_.end()) return &it->second;
  }
  return nullptr;
}

std::string ScriptedBackend::render(const CallSite& site) const {
  const Response* found = lookup(site);
  if (!found) {
    return "No scripted response is registered for " +
           key(site.bug_id, site.parent_node, site.expansion_index) + " (" +
           std::string(to_string(site.purpose)) + ").";
  }
  const Response& r = *found;
  const std::map<std::string, std::string> vars = {{"parent", std::to_string(site.parent_node)},
                                                   {"expansion", std::to_string(site.expansion_index)}};
  auto expand = [&](const std::string& text) { return prompts::render(text, vars); };
  switch (site.purpose) {
    case CallPurpose::repair: {
      std::string text = expand(r.cot);
      if (r.draft) text += (text.empty() ? "" : "\n\n") + fence(expand(*r.draft));
      return text;
    }
    case CallPurpose::reflect: {
      std::string text = expand(r.reflection);
      if (r.final_patch) text += (text.empty() ? "" : "\n\n") + fence(expand(*r.final_patch));
      return text;
    }
    case CallPurpose::judge: {
      const auto& list = (site.attempt > 0 && !r.judge_reask.empty()) ? r.judge_reask : r.judge;
      if (list.empty()) return "No scripted judgement for this call.";
      const auto i = std::min<std::size_t>(static_cast<std::size_t>(site.sample_index), list.size() - 1);
      return render_score(list[i]);
    }
  }
  return {};
}

Completion ScriptedBackend::complete(std::span<const ChatMessage> messages, const CallSite& site,
                                     const SamplingParams&) {
  std::lock_guard lock(*mu_);
  Completion c;
  c.text = render(site);
  if (usage_per_call_) {
    c.usage.prompt_tokens = usage_per_call_->first;
    c.usage.completion_tokens = usage_per_call_->second;
  } else {
    for (const auto& m : messages) c.usage.prompt_tokens += estimate_tokens(m.content);
    c.usage.completion_tokens = estimate_tokens(c.text);
  }
  c.usage.total_tokens = c.usage.prompt_tokens + c.usage.completion_tokens;
  calls_.push_back(CallRecord{site, c.usage});
  return c;
}

std::vector<ScriptedBackend::CallRecord> ScriptedBackend::calls() const {
  std::lock_guard lock(*mu_);
  return calls_;
}

std::size_t ScriptedBackend::call_count() const {
  std::lock_guard lock(*mu_);
  return calls_.size();
}

std::int64_t ScriptedBackend::total_tokens() const {
  std::lock_guard lock(*mu_);
  std::int64_t total = 0;
  for (const auto& c : calls_) total += c.usage.total_tokens;
  return total;
}

void ScriptedBackend::clear_calls() {
  std::lock_guard lock(*mu_);
  calls_.clear();
}

}  // namespace mcts_repair
