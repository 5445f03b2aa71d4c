#include "mcts_repair/generation.hpp"

#include <chrono>

#include "mcts_repair/prompts.hpp"

namespace mcts_repair {

namespace prompts {

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(pos, open - pos));
    const std::string name(tmpl.substr(open + 2, close - open - 2));
    if (auto it = vars.find(name); it != vars.end()) {
      out += it->second;
    } else {
      out.append(tmpl.substr(open, close + 2 - open));
    }
    pos = close + 2;
  }
  out.append(tmpl.substr(pos));
  return out;
}

}  // namespace prompts

namespace {

std::map<std::string, std::string> region_vars(const BugSpec& bug) {
  return {{"bug_id", bug.bug_id},
          {"buggy_file", bug.buggy_file.generic_string()},
          {"region_first", std::to_string(bug.buggy_region.first)},
          {"region_last", std::to_string(bug.buggy_region.last)},
          {"buggy_code", bug.buggy_code},
          {"context_code", bug.context_code.empty() ? bug.buggy_code : bug.context_code}};
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

bool is_fence_line(std::string_view line) {
  const auto start = line.find_first_not_of(" \t");
  return start != std::string_view::npos && line.substr(start, 3) == "```";
}

SamplingParams sampling(const SearchConfig& config) {
  return SamplingParams{config.temperature, config.max_tokens, config.rng_seed};
}

}  // namespace

std::vector<ChatMessage> build_repair_prompt(const GenerationContext& ctx) {
  auto vars = region_vars(ctx.bug);
  const auto& patch = ctx.selected_node.patch;
  if (patch.origin != PatchOrigin::root &&
      normalize_code(patch.replacement_text) != normalize_code(ctx.bug.buggy_code)) {
    vars["partial_patch_section"] =
        prompts::render(prompts::partial_patch, {{"partial_patch", patch.replacement_text}});
  } else {
    vars["partial_patch_section"] = "";
  }
  vars["failing_test_names"] = ctx.failing_tests.empty() ? "(none recorded)" : join(ctx.failing_tests, ", ");
  vars["failure_feedback"] = ctx.failure_feedback.empty() ? "(no output captured)" : ctx.failure_feedback;

  return {ChatMessage{"system", std::string(prompts::repair_system)},
          ChatMessage{"user", prompts::render(prompts::repair_user, vars)}};
}

std::optional<std::string> extract_patch(std::string_view model_text) {
  std::optional<std::string> last;
  std::optional<std::string> current;
  std::size_t pos = 0;
  while (pos <= model_text.size()) {
    auto nl = model_text.find('\n', pos);
    if (nl == std::string_view::npos) nl = model_text.size();
    std::string_view line = model_text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (is_fence_line(line)) {
      if (current) {
        last = std::move(*current);
        current.reset();
      } else {
        current.emplace();
      }
    } else if (current) {
      current->append(line);
      current->push_back('\n');
    }
    pos = nl + 1;
  }
  if (last && !last->empty() && last->back() == '\n') last->pop_back();
  return last;
}

Reflection reflect(ModelBackend& backend, const GenerationContext& ctx,
                   std::vector<ChatMessage> conversation, const std::string& draft,
                   int expansion_index) {
  if (draft.empty()) throw InvalidConfig("reflect needs a non-empty draft");
  auto vars = region_vars(ctx.bug);
  vars["draft_patch"] = draft;
  conversation.push_back(ChatMessage{"user", prompts::render(prompts::reflect_user, vars)});

  CallSite site;
  site.bug_id = ctx.bug.bug_id;
  site.parent_node = ctx.selected_node.node_id;
  site.expansion_index = expansion_index;
  site.purpose = CallPurpose::reflect;
  site.parent_patch = ctx.selected_node.patch.replacement_text;
  const Completion c = backend.complete(conversation, site, sampling(ctx.config));

  Reflection r;
  r.reflection = c.text;
  r.revised = extract_patch(c.text).value_or(draft);
  if (r.revised.empty()) r.revised = draft;
  r.prompt_tokens = c.usage.prompt_tokens;
  r.completion_tokens = c.usage.completion_tokens;
  r.tokens_estimated = c.usage.estimated;
  return r;
}

std::vector<GenerationRecord> generate_candidates(ModelBackend& backend, const GenerationContext& ctx,
                                                  std::optional<int> count) {
  const int n = count.value_or(ctx.config.branch);
  if (n < 1) throw InvalidConfig("generate_candidates needs branch >= 1");

  const auto messages = build_repair_prompt(ctx);
  std::vector<GenerationRecord> records;
  records.reserve(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) {
    const auto started = std::chrono::steady_clock::now();
    const int expansion_index = ctx.selected_node.expansions + b;

    CallSite site;
    site.bug_id = ctx.bug.bug_id;
    site.parent_node = ctx.selected_node.node_id;
    site.expansion_index = expansion_index;
    site.purpose = CallPurpose::repair;
    site.parent_patch = ctx.selected_node.patch.replacement_text;
    const Completion first = backend.complete(messages, site, sampling(ctx.config));

    GenerationRecord rec;
    rec.cot_trace = first.text;
    rec.prompt_tokens = first.usage.prompt_tokens;
    rec.completion_tokens = first.usage.completion_tokens;
    rec.tokens_estimated = first.usage.estimated;

    const auto draft = extract_patch(first.text);
    if (draft && !draft->empty()) {
      rec.draft_patch = *draft;
      auto conversation = messages;
      conversation.push_back(ChatMessage{"assistant", first.text});
      Reflection r = reflect(backend, ctx, std::move(conversation), *draft, expansion_index);
      rec.reflection = std::move(r.reflection);
      rec.final_patch = std::move(r.revised);
      rec.prompt_tokens += r.prompt_tokens;
      rec.completion_tokens += r.completion_tokens;
      rec.tokens_estimated = rec.tokens_estimated || r.tokens_estimated;
    } else {
      rec.parseable = false;
    }
    rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
    records.push_back(std::move(rec));
  }
  return records;
}

std::string format_failure_feedback(const BugSpec& bug,
                                    const std::map<std::string, TestOutcome>& outcomes) {
  std::string out;
  for (const auto& test : bug.test_cases) {
    const auto it = outcomes.find(test.test_id);
    if (it == outcomes.end() || it->second.status == TestStatus::pass) continue;
    out += "[" + test.test_id + "] " + std::string(to_string(it->second.status)) + "\n";
    if (!it->second.failure_text.empty()) {
      out += it->second.failure_text;
      if (out.back() != '\n') out += '\n';
    }
  }
  return out;
}

}  // namespace mcts_repair
