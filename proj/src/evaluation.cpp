#include "mcts_repair/evaluation.hpp"

#include <charconv>
#include <cmath>

#include "mcts_repair/generation.hpp"
#include "mcts_repair/prompts.hpp"

namespace mcts_repair {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string test_results_text(const JudgeContext& ctx) {
  std::string out;
  for (const auto& test : ctx.bug.test_cases) {
    const auto it = ctx.validation.outcomes.find(test.test_id);
    const std::string status = it == ctx.validation.outcomes.end()
                                   ? "not run"
                                   : std::string(to_string(it->second));
    out += "- " + test.test_id + ": " + status + "\n";
  }
  const std::string failures = format_failure_feedback(ctx.bug, ctx.validation.test_outcomes());
  if (!failures.empty()) out += "\nFailure output:\n" + failures;
  return out;
}

std::string test_names(const BugSpec& bug) {
  std::string out;
  for (const auto& t : bug.test_cases) {
    if (!out.empty()) out += ", ";
    out += t.test_id;
  }
  return out;
}

}  // namespace

JudgeStrategy choose_strategy(const BugSpec& bug, const SearchConfig& config) {
  if (config.strategy_override) return *config.strategy_override;
  return static_cast<int>(bug.test_cases.size()) >= config.test_sufficiency_threshold
             ? JudgeStrategy::test_judge
             : JudgeStrategy::llm_judge;
}

double clamp_score(double score) {
  if (score <= 0) return 0.0;
  if (score >= 100) return 1.0;
  return score / 100.0;
}

std::optional<double> parse_judge_score(std::string_view text) {
  std::string_view last;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    if (!line.empty()) last = line;
    pos = nl + 1;
  }
  if (last.empty()) return std::nullopt;
  if (last.size() > 4 && last.substr(last.size() - 4) == "/100") {
    last = trim(last.substr(0, last.size() - 4));
  }
  if (!last.empty() && last.front() == '+') last.remove_prefix(1);

  double value = 0;
  const auto [ptr, ec] = std::from_chars(last.data(), last.data() + last.size(), value);
  if (ec != std::errc() || ptr != last.data() + last.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::vector<ChatMessage> build_judge_prompt(const JudgeContext& ctx) {
  const auto& bug = ctx.bug;
  std::map<std::string, std::string> vars = {
      {"bug_id", bug.bug_id},
      {"buggy_file", bug.buggy_file.generic_string()},
      {"region_first", std::to_string(bug.buggy_region.first)},
      {"region_last", std::to_string(bug.buggy_region.last)},
      {"context_code", bug.context_code.empty() ? bug.buggy_code : bug.context_code},
      {"buggy_code", bug.buggy_code},
      {"parent_patch", ctx.parent.replacement_text},
      {"candidate_patch", ctx.candidate.replacement_text},
      {"test_names", test_names(bug)},
      {"test_results", test_results_text(ctx)},
      {"cot_trace", ctx.generation.cot_trace.empty() ? "(none)" : ctx.generation.cot_trace},
      {"reflection", ctx.generation.reflection.empty() ? "(none)" : ctx.generation.reflection},
  };
  return {ChatMessage{"system", std::string(prompts::judge_system)},
          ChatMessage{"user", prompts::render(prompts::judge_user, vars)}};
}

EvaluationRecord llm_judge(ModelBackend& backend, const JudgeContext& ctx, const SearchConfig& config) {
  EvaluationRecord rec;
  rec.strategy = JudgeStrategy::llm_judge;
  rec.test_outcomes = ctx.validation.test_outcomes();

  const auto messages = build_judge_prompt(ctx);
  const SamplingParams params{config.temperature, config.max_tokens, config.rng_seed};

  CallSite site;
  site.bug_id = ctx.bug.bug_id;
  site.parent_node = ctx.parent_id;
  site.expansion_index = ctx.expansion_index;
  site.purpose = CallPurpose::judge;
  site.parent_patch = ctx.parent.replacement_text;
  site.candidate_patch = ctx.candidate.replacement_text;

  double sum = 0.0;
  for (int i = 0; i < config.n_judge_samples; ++i) {
    site.sample_index = i;
    site.attempt = 0;
    Completion c = backend.complete(messages, site, params);
    rec.prompt_tokens += c.usage.prompt_tokens;
    rec.completion_tokens += c.usage.completion_tokens;
    auto score = parse_judge_score(c.text);
    if (!score) {
      auto reask = messages;
      reask.push_back(ChatMessage{"assistant", c.text});
      reask.push_back(ChatMessage{"user", std::string(prompts::judge_reask)});
      site.attempt = 1;
      Completion again = backend.complete(reask, site, params);
      rec.prompt_tokens += again.usage.prompt_tokens;
      rec.completion_tokens += again.usage.completion_tokens;
      score = parse_judge_score(again.text);
    }
    const double raw = score.value_or(0.0);
    const double reward = clamp_score(raw);
    rec.raw_scores.push_back(raw);
    rec.per_sample_rewards.push_back(reward);
    sum += reward;
  }
  rec.expected_reward = sum / static_cast<double>(config.n_judge_samples);
  return rec;
}

EvaluationRecord test_judge(const JudgeContext& ctx) {
  EvaluationRecord rec;
  rec.strategy = JudgeStrategy::test_judge;
  rec.test_outcomes = ctx.validation.test_outcomes();
  int passed = 0;
  for (const auto& test : ctx.bug.test_cases) {
    const auto it = ctx.validation.outcomes.find(test.test_id);
    passed += it != ctx.validation.outcomes.end() && it->second == TestStatus::pass;
  }
  const double reward = static_cast<double>(passed) / static_cast<double>(ctx.bug.test_cases.size());
  rec.per_sample_rewards = {reward};
  rec.expected_reward = reward;
  return rec;
}

EvaluationRecord evaluate(ModelBackend& backend, const JudgeContext& ctx, const SearchConfig& config) {
  const JudgeStrategy strategy = choose_strategy(ctx.bug, config);
  const bool unusable = !ctx.generation.parseable || ctx.candidate.replacement_text.empty();
  if (unusable || !ctx.validation.compiled) {
    EvaluationRecord rec;
    rec.strategy = strategy;
    rec.adjustments.insert(Adjustment::compile_failure);
    rec.expected_reward = kCompileFailureReward;
    return rec;
  }

  EvaluationRecord rec = strategy == JudgeStrategy::test_judge ? test_judge(ctx)
                                                               : llm_judge(backend, ctx, config);
  if (normalize_code(ctx.candidate.replacement_text) == normalize_code(ctx.parent.replacement_text)) {
    rec.adjustments.insert(Adjustment::identical_to_parent);
    rec.expected_reward *= kIdenticalPenalty;
  }
  return rec;
}

double rederive_expected_reward(const EvaluationRecord& eval) {
  if (eval.has(Adjustment::compile_failure)) return kCompileFailureReward;
  double sum = 0.0;
  for (double r : eval.per_sample_rewards) sum += r;
  double reward = eval.per_sample_rewards.empty()
                      ? 0.0
                      : sum / static_cast<double>(eval.per_sample_rewards.size());
  if (eval.has(Adjustment::identical_to_parent)) reward *= kIdenticalPenalty;
  return reward;
}

}  // namespace mcts_repair
