#include "mcts_repair/engine.hpp"

#include "mcts_repair/evaluation.hpp"
#include "mcts_repair/generation.hpp"
#include "mcts_repair/llm_client.hpp"

namespace mcts_repair {

bool exact_match(const std::string& candidate, const std::optional<std::string>& reference) {
  return reference && normalize_code(candidate) == normalize_code(*reference);
}

RepairEngine::RepairEngine(BugSpec bug, SearchConfig config, ModelBackend& generator,
                           Validator& validator, ModelBackend* judge)
    : bug_(std::move(bug)),
      config_(std::move(config)),
      generator_(generator),
      judge_(judge ? *judge : generator),
      validator_(validator),
      tree_(Patch::root_of(bug_)),
      started_(std::chrono::steady_clock::now()) {
  bug_.validate();
  config_.validate();
}

void RepairEngine::initialize() {
  if (initialized_) return;
  const ValidationResult baseline = validator_.validate(bug_, tree_.root().patch);
  baseline_outcomes_ = baseline.test_outcomes();
  baseline_build_output_ = baseline.build_output;

  EvaluationRecord root_eval;
  root_eval.strategy = choose_strategy(bug_, config_);
  root_eval.test_outcomes = baseline_outcomes_;
  tree_.mutable_node(kRootId).evaluation = std::move(root_eval);
  initialized_ = true;
}

std::string RepairEngine::feedback_for(const PatchNode& node, std::vector<std::string>& failing) const {
  const auto& outcomes = node.evaluation ? node.evaluation->test_outcomes : baseline_outcomes_;
  for (const auto& test : bug_.test_cases) {
    auto it = outcomes.find(test.test_id);
    if (it != outcomes.end() && it->second.status != TestStatus::pass) failing.push_back(test.test_id);
  }
  if (node.node_id == kRootId && outcomes.empty() && !baseline_build_output_.empty()) {
    failing.push_back("(build)");
    return baseline_build_output_;
  }
  return format_failure_feedback(bug_, outcomes);
}

std::vector<IterationLogEntry> RepairEngine::iteration() {
  const int count = std::min(config_.branch, remaining_budget());
  if (count <= 0) return {};
  initialize();

  const NodeId selected_id = select_by_policy(tree_, config_);
  const PatchNode selected = tree_.node(selected_id);  // copy: the tree grows below
  iterations_ += 1;

  std::vector<std::string> failing;
  std::string feedback = feedback_for(selected, failing);
  const GenerationContext ctx{bug_, selected, std::move(feedback), std::move(failing), config_};
  const auto records = generate_candidates(generator_, ctx, count);

  std::vector<IterationLogEntry> entries;
  for (std::size_t b = 0; b < records.size(); ++b) {
    const GenerationRecord& rec = records[b];
    Patch candidate{bug_.bug_id + "#" + std::to_string(tree_.next_id()), rec.final_patch,
                    PatchOrigin::generated};

    ValidationResult validation;
    if (rec.parseable && !candidate.replacement_text.empty()) {
      validation = validator_.validate(bug_, candidate);
    }
    const JudgeContext jc{bug_,           candidate,   selected.patch, rec, validation,
                          selected_id,    selected.expansions + static_cast<int>(b)};
    EvaluationRecord eval = evaluate(judge_, jc, config_);

    const NodeId id = tree_.add_child(selected_id, candidate, rec, std::move(eval), config_, iterations_);
    tree_.backpropagate(id, config_.beta);
    generated_ += 1;

    const PatchNode& added = tree_.node(id);
    if (added.status == NodeStatus::plausible) plausible_.push_back(id);
    IterationLogEntry entry{iterations_, selected_id, id, added.reward_R, added.status};
    log_.push_back(entry);
    entries.push_back(entry);
  }
  return entries;
}

RepairReport RepairEngine::run() {
  started_ = std::chrono::steady_clock::now();
  try {
    while (remaining_budget() > 0) {
      if (config_.early_stop_on_plausible && has_plausible()) return report(StopReason::early_stop);
      try {
        iteration();
      } catch (const NoEligibleNode&) {
        return report(StopReason::exhausted);
      }
    }
  } catch (const BackendUnavailable& e) {
    return report(StopReason::aborted, e.what());
  } catch (const MalformedResponse& e) {
    return report(StopReason::aborted, e.what());
  }
  return report(StopReason::budget);
}

RepairReport RepairEngine::report(StopReason reason, std::string abort_reason) const {
  RepairReport r;
  r.bug_id = bug_.bug_id;
  r.reference_available = bug_.reference_patch.has_value();
  for (NodeId id : plausible_) {
    const auto& text = tree_.node(id).patch.replacement_text;
    r.plausible_patches.push_back(PlausiblePatch{id, text, exact_match(text, bug_.reference_patch)});
  }
  r.total_patches_generated = generated_;
  r.iterations = iterations_;
  for (const auto& node : tree_.nodes()) {
    if (node.generation) {
      r.prompt_tokens += node.generation->prompt_tokens;
      r.completion_tokens += node.generation->completion_tokens;
    }
    if (node.evaluation) {
      r.prompt_tokens += node.evaluation->prompt_tokens;
      r.completion_tokens += node.evaluation->completion_tokens;
    }
  }
  r.tokens_total = r.prompt_tokens + r.completion_tokens;
  r.estimated_cost = cost(r.tokens_total, config_.price_per_1k_tokens);
  r.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started_)
                       .count();
  r.stop_reason = reason;
  r.abort_reason = std::move(abort_reason);
  r.tree_snapshot = TreeSnapshot{config_, tree_};
  r.per_iteration_log = log_;
  return r;
}

RepairReport repair(const BugSpec& bug, ModelBackend& backend, const SearchConfig& config) {
  bug.validate_workspace();
  WorkspaceValidator validator;
  RepairEngine engine(bug, config, backend, validator);
  return engine.run();
}

}  // namespace mcts_repair
