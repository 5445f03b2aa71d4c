#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcts_repair/backend.hpp"
#include "mcts_repair/core.hpp"

namespace mcts_repair {

/// Everything the generator sees for one expansion of a selected node.
struct GenerationContext {
  const BugSpec& bug;
  const PatchNode& selected_node;
  // Failing-test output of the selected node (the original bug's for the root).
  std::string failure_feedback;
  std::vector<std::string> failing_tests;
  const SearchConfig& config;
};

/// System + user messages asking for step-by-step reasoning followed by a
/// fenced replacement of the buggy region. Deterministic.
std::vector<ChatMessage> build_repair_prompt(const GenerationContext& ctx);

/// Content of the last closed ``` fence; the fence's language tag is ignored.
std::optional<std::string> extract_patch(std::string_view model_text);

struct Reflection {
  std::string reflection;
  std::string revised;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  bool tokens_estimated = false;
};

/// One critique-and-revise round on a non-empty draft. When the critique has
/// no fenced block the draft is kept.
Reflection reflect(ModelBackend& backend, const GenerationContext& ctx,
                   std::vector<ChatMessage> conversation, const std::string& draft,
                   int expansion_index);

/// `count` candidates (config.branch when unset), each one repair completion
/// plus one reflection. An unparseable repair completion yields a record with
/// an empty final_patch and parseable = false, and skips reflection.
std::vector<GenerationRecord> generate_candidates(ModelBackend& backend, const GenerationContext& ctx,
                                                  std::optional<int> count = std::nullopt);

/// Failing-test digest used as generation feedback: one block per test that
/// did not pass, in test-declaration order.
std::string format_failure_feedback(const BugSpec& bug,
                                    const std::map<std::string, TestOutcome>& outcomes);

}  // namespace mcts_repair
