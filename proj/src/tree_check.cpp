#include "mcts_repair/tree_check.hpp"

#include <algorithm>
#include <cmath>

#include "mcts_repair/evaluation.hpp"

namespace mcts_repair {

std::string to_string(const TreeIssue& issue) {
  if (!issue.node) return issue.message;
  return "node " + std::to_string(*issue.node) + ": " + issue.message;
}

namespace {

bool in_unit_range(double v) { return std::isfinite(v) && v >= -1.0 && v <= 1.0; }

std::vector<std::int64_t> descendant_counts(const PatchTree& tree) {
  std::vector<std::int64_t> count(tree.size(), 0);
  // Children always have larger ids, so a reverse sweep sees them first.
  for (auto i = static_cast<NodeId>(tree.size()) - 1; i > kRootId; --i) {
    const auto& node = tree.node(i);
    count[static_cast<std::size_t>(*node.parent)] += 1 + count[static_cast<std::size_t>(i)];
  }
  return count;
}

EvaluationRecord evaluation_for_replay(const PatchNode& node) {
  if (node.evaluation) return *node.evaluation;
  EvaluationRecord e;
  e.expected_reward = node.reward_R;
  if (node.status == NodeStatus::compile_failed) e.adjustments.insert(Adjustment::compile_failure);
  if (node.status == NodeStatus::plausible) e.test_outcomes["replay"] = TestOutcome{TestStatus::pass, {}};
  return e;
}

}  // namespace

std::vector<TreeIssue> check_tree_invariants(const TreeSnapshot& snapshot) {
  std::vector<TreeIssue> issues;
  const auto& tree = snapshot.tree;
  const auto& config = snapshot.config;
  const auto descendants = descendant_counts(tree);

  for (const auto& node : tree.nodes()) {
    auto issue = [&](std::string msg) { issues.push_back(TreeIssue{node.node_id, std::move(msg)}); };

    if (!in_unit_range(node.reward_R)) issue("reward_R outside [-1, 1]");
    if (!in_unit_range(node.quality_Q)) issue("quality_Q outside [-1, 1]");
    if ((node.reward_R == kCompileFailureReward) != (node.status == NodeStatus::compile_failed)) {
      issue("reward_R is -1 exactly when status is compile_failed; found R=" +
            std::to_string(node.reward_R) + " status=" + std::string(to_string(node.status)));
    }
    if (node.is_terminal() && node.expansions != 0) issue("terminal node has been expanded");
    if (node.expansions != static_cast<int>(node.children.size())) {
      issue("expansions (" + std::to_string(node.expansions) + ") differs from child count (" +
            std::to_string(node.children.size()) + ")");
    }
    if (node.expansions > config.max_expansion) issue("expansions exceed max_expansion");

    std::int64_t child_visits = 0;
    for (NodeId c : node.children) child_visits += tree.node(c).visits_N;
    if (node.visits_N < child_visits) {
      issue("visits_N (" + std::to_string(node.visits_N) + ") below the children's total (" +
            std::to_string(child_visits) + ")");
    }
    const std::int64_t expected_visits = 1 + descendants[static_cast<std::size_t>(node.node_id)];
    if (node.visits_N != expected_visits) {
      issue("visits_N is " + std::to_string(node.visits_N) + ", expected " +
            std::to_string(expected_visits) + " (one plus descendants)");
    }

    if (node.node_id == kRootId) {
      if (node.patch.origin != PatchOrigin::root) issue("root patch origin is not 'root'");
      continue;
    }
    if (node.iteration < 1) issue("non-root node without an iteration number");
    if (node.generation && node.generation->final_patch != node.patch.replacement_text) {
      issue("patch text differs from the generation record's final patch");
    }
    if (node.generation && (node.generation->prompt_tokens < 0 || node.generation->completion_tokens < 0)) {
      issue("negative token count");
    }
    if (node.evaluation) {
      const auto& e = *node.evaluation;
      if (status_from_evaluation(e) != node.status) issue("status disagrees with the evaluation record");
      if (rederive_expected_reward(e) != e.expected_reward) {
        issue("expected_reward does not re-derive from the per-sample rewards and adjustments");
      }
      if (std::clamp(e.expected_reward, -1.0, 1.0) != node.reward_R) {
        issue("reward_R differs from the evaluation's expected_reward");
      }
      if (e.strategy == JudgeStrategy::test_judge && !e.has(Adjustment::compile_failure) &&
          e.per_sample_rewards.size() != 1) {
        issue("test_judge evaluation must hold exactly one sample");
      }
    }
  }
  return issues;
}

std::vector<TreeIssue> check_replay(const TreeSnapshot& snapshot) {
  std::vector<TreeIssue> issues;
  const auto& original = snapshot.tree;
  const auto& config = snapshot.config;

  PatchTree rebuilt(original.root().patch);
  std::size_t i = 1;
  while (i < original.size()) {
    const auto& first = original.node(static_cast<NodeId>(i));
    const NodeId parent = *first.parent;

    NodeId selected = kRootId;
    try {
      selected = select_by_policy(rebuilt, config);
    } catch (const NoEligibleNode&) {
      issues.push_back({first.node_id, "replay found no eligible node at iteration " +
                                           std::to_string(first.iteration)});
      return issues;
    }
    if (selected != parent) {
      issues.push_back({first.node_id, "iteration " + std::to_string(first.iteration) +
                                           ": replay selects node " + std::to_string(selected) +
                                           " but the snapshot expanded node " + std::to_string(parent)});
      return issues;
    }

    // One iteration's children are consecutive and share parent and iteration number.
    while (i < original.size()) {
      const auto& node = original.node(static_cast<NodeId>(i));
      if (node.iteration != first.iteration || *node.parent != parent) break;
      try {
        const NodeId id = rebuilt.add_child(parent, node.patch, node.generation,
                                            evaluation_for_replay(node), config, node.iteration);
        rebuilt.backpropagate(id, config.beta);
      } catch (const Error& e) {
        issues.push_back({node.node_id, std::string("replay could not re-insert the node: ") + e.what()});
        return issues;
      }
      ++i;
    }
  }

  for (const auto& node : original.nodes()) {
    const auto& again = rebuilt.node(node.node_id);
    if (again.quality_Q != node.quality_Q) {
      issues.push_back({node.node_id, "quality_Q does not replay (stored " + std::to_string(node.quality_Q) +
                                          ", replayed " + std::to_string(again.quality_Q) + ")"});
    }
    if (again.visits_N != node.visits_N) {
      issues.push_back({node.node_id, "visits_N does not replay (stored " + std::to_string(node.visits_N) +
                                          ", replayed " + std::to_string(again.visits_N) + ")"});
    }
    if (again.expansions != node.expansions) {
      issues.push_back({node.node_id, "expansions do not replay"});
    }
    if (again.status != node.status) {
      issues.push_back({node.node_id, "status does not replay"});
    }
  }
  return issues;
}

std::vector<TreeIssue> verify_snapshot(const TreeSnapshot& snapshot) {
  auto issues = check_tree_invariants(snapshot);
  auto replay = check_replay(snapshot);
  issues.insert(issues.end(), replay.begin(), replay.end());
  return issues;
}

}  // namespace mcts_repair
