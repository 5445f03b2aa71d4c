#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcts_repair/backend.hpp"
#include "mcts_repair/core.hpp"
#include "mcts_repair/validation.hpp"

namespace mcts_repair {

/// Multiplier applied to a candidate identical (after normalization) to its parent.
inline constexpr double kIdenticalPenalty = 0.5;
inline constexpr double kCompileFailureReward = -1.0;

struct JudgeContext {
  const BugSpec& bug;
  const Patch& candidate;
  const Patch& parent;
  const GenerationRecord& generation;
  const ValidationResult& validation;
  NodeId parent_id = kRootId;
  int expansion_index = 0;
};

/// test_judge once the bug declares at least test_sufficiency_threshold
/// tests, llm_judge otherwise; config.strategy_override wins.
JudgeStrategy choose_strategy(const BugSpec& bug, const SearchConfig& config);

/// Raw judge score to reward: 0 at or below 0, 1 at or above 100, score/100 between.
double clamp_score(double score);

/// The number on the last non-empty line of a judge answer, if that line is
/// a bare number (an optional trailing "/100" is tolerated).
std::optional<double> parse_judge_score(std::string_view text);

std::vector<ChatMessage> build_judge_prompt(const JudgeContext& ctx);

/// n_judge_samples independent judge completions, each clamped, then
/// averaged. A sample without a parseable score is re-asked once and then
/// scores 0.
EvaluationRecord llm_judge(ModelBackend& backend, const JudgeContext& ctx, const SearchConfig& config);

/// Reward = passed / declared tests; timeouts and errors do not pass.
EvaluationRecord test_judge(const JudgeContext& ctx);

/// Compile failures (including empty or unparseable patches) score -1 with
/// no judge call; otherwise the chosen judge runs and a candidate identical
/// to its parent has its reward halved.
EvaluationRecord evaluate(ModelBackend& backend, const JudgeContext& ctx, const SearchConfig& config);

/// Recomputes expected_reward from the record's other fields.
double rederive_expected_reward(const EvaluationRecord& eval);

}  // namespace mcts_repair
