#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcts_repair/core.hpp"
#include "mcts_repair/llm_client.hpp"

namespace mcts_repair {

enum class CallPurpose { repair, reflect, judge };

std::string_view to_string(CallPurpose p);

/// Where in the search a completion is requested. Live backends ignore it;
/// scripted backends use it as their lookup key.
struct CallSite {
  std::string bug_id;
  NodeId parent_node = kRootId;
  int expansion_index = 0;
  CallPurpose purpose = CallPurpose::repair;
  int sample_index = 0;  // judge sample number
  int attempt = 0;       // 1 for a judge re-ask
  std::string parent_patch;
  std::string candidate_patch;  // judge calls only
};

struct SamplingParams {
  double temperature = 0.9;
  int max_tokens = 8000;
  std::optional<std::uint64_t> seed;
};

struct Completion {
  std::string text;
  Usage usage;
};

/// The model used for both patch generation and judging.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  /// Throws BackendUnavailable when the model cannot be reached.
  virtual Completion complete(std::span<const ChatMessage> messages, const CallSite& site,
                              const SamplingParams& params) = 0;
};

/// Backend over a chat-completion client.
class LiveBackend : public ModelBackend {
 public:
  explicit LiveBackend(std::shared_ptr<ChatClient> client);

  Completion complete(std::span<const ChatMessage> messages, const CallSite& site,
                      const SamplingParams& params) override;

 private:
  std::shared_ptr<ChatClient> client_;
};

/// Replays canned model output keyed by (bug_id, parent_node_id, expansion_index).
/// Lookup tries "<bug>/<parent>/<k>", then "<bug>/<parent>/*", "<bug>/*/<k>"
/// and "<bug>/*/*". Patch and prose texts may use {{parent}} and
/// {{expansion}}, replaced by the call site's values.
///
/// Fixture file:
///   { "responses": { "<bug_id>/<parent>/<expansion>": {
///         "cot": "...", "draft": "..." | null,
///         "reflection": "...", "final": "..." | null,
///         "judge": [ 80, "raw text", ... ], "judge_reask": [ ... ] } },
///     "usage_per_call": { "prompt_tokens": 500, "completion_tokens": 125 } }
///
/// A repair completion renders as the cot text followed by the draft in a
/// code fence; a reflection as the reflection text followed by the final
/// patch in a fence. Null or missing patches render without a fence. Judge
/// sample i answers with judge[i] (the last entry repeats). Unknown keys
/// answer with prose that contains no patch or score.
class ScriptedBackend : public ModelBackend {
 public:
  struct Response {
    std::string cot;
    std::optional<std::string> draft;
    std::string reflection;
    std::optional<std::string> final_patch;
    std::vector<nlohmann::json> judge;
    std::vector<nlohmann::json> judge_reask;
  };

  struct CallRecord {
    CallSite site;
    Usage usage;
  };

  ScriptedBackend() = default;
  explicit ScriptedBackend(std::map<std::string, Response> responses);

  static ScriptedBackend from_json(const nlohmann::json& fixture);
  /// Throws MalformedEntry with the file name on schema errors.
  static ScriptedBackend from_file(const fs::path& path);

  static std::string key(std::string_view bug_id, NodeId parent, int expansion);

  void set_response(const std::string& key, Response response);
  /// Every call reports this usage instead of byte-length estimates.
  void set_usage_per_call(std::int64_t prompt_tokens, std::int64_t completion_tokens);

  Completion complete(std::span<const ChatMessage> messages, const CallSite& site,
                      const SamplingParams& params) override;

  std::vector<CallRecord> calls() const;
  std::size_t call_count() const;
  std::int64_t total_tokens() const;
  void clear_calls();

 private:
  const Response* lookup(const CallSite& site) const;
  std::string render(const CallSite& site) const;

  std::map<std::string, Response> responses_;
  std::optional<std::pair<std::int64_t, std::int64_t>> usage_per_call_;
  std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
  std::vector<CallRecord> calls_;
};

/// Renders a patch the way a model is asked to: inside a code fence.
std::string fence(std::string_view code);

}  // namespace mcts_repair
