#include <gtest/gtest.h>

#include "mcts_repair/engine.hpp"
#include "mcts_repair/landscape.hpp"
#include "mcts_repair/tree_check.hpp"
#include "test_support.hpp"

namespace mcts_repair {
namespace {

// A realistic snapshot: a full run over the deceptive landscape.
TreeSnapshot landscape_snapshot() {
  const auto land = deceptive_corridor_landscape();
  const BugSpec bug = land.bug_spec();
  LandscapeBackend backend(land, 3);
  LandscapeValidator validator(land);
  SearchConfig config;
  config.strategy_override = JudgeStrategy::llm_judge;
  RepairEngine engine(bug, config, backend, validator);
  return engine.run().tree_snapshot;
}

bool mentions(const std::vector<TreeIssue>& issues, NodeId node, std::string_view text) {
  for (const auto& i : issues) {
    if (i.node == node && i.message.find(text) != std::string::npos) return true;
  }
  return false;
}

TEST(TreeCheck, EngineSnapshotsAreHealthy) {
  const TreeSnapshot snap = landscape_snapshot();
  ASSERT_GT(snap.tree.size(), 5u);
  const auto issues = verify_snapshot(snap);
  for (const auto& i : issues) ADD_FAILURE() << to_string(i);
}

TEST(TreeCheck, RootOnlyTreeIsHealthy) {
  TreeSnapshot snap{SearchConfig{}, PatchTree(Patch{"r", "x", PatchOrigin::root})};
  EXPECT_TRUE(verify_snapshot(snap).empty());
}

TEST(TreeCheck, CorruptedVisitCountIsReported) {
  TreeSnapshot snap = landscape_snapshot();
  snap.tree.mutable_node(2).visits_N += 1;
  const auto issues = check_tree_invariants(snap);
  EXPECT_TRUE(mentions(issues, 2, "visits_N"));
  EXPECT_FALSE(check_replay(snap).empty());
}

TEST(TreeCheck, CorruptedQualityFailsReplayOnly) {
  TreeSnapshot snap = landscape_snapshot();
  snap.tree.mutable_node(1).quality_Q += 1e-9;
  EXPECT_TRUE(check_tree_invariants(snap).empty());
  const auto replay = check_replay(snap);
  ASSERT_FALSE(replay.empty());
}

TEST(TreeCheck, RewardOutsideRangeAndCompileMismatch) {
  TreeSnapshot snap = landscape_snapshot();
  snap.tree.mutable_node(1).reward_R = 1.5;
  EXPECT_TRUE(mentions(check_tree_invariants(snap), 1, "reward_R outside"));

  snap = landscape_snapshot();
  auto& n = snap.tree.mutable_node(1);
  n.reward_R = -1;
  EXPECT_TRUE(mentions(check_tree_invariants(snap), 1, "compile_failed"));
}

TEST(TreeCheck, TamperedEvaluationDoesNotRederive) {
  TreeSnapshot snap = landscape_snapshot();
  auto& n = snap.tree.mutable_node(1);
  ASSERT_TRUE(n.evaluation.has_value());
  n.evaluation->per_sample_rewards[0] = 0.99;
  EXPECT_FALSE(check_tree_invariants(snap).empty());
}

TEST(TreeCheck, ExpandedTerminalNodeIsReported) {
  TreeSnapshot snap = landscape_snapshot();
  for (const auto& node : snap.tree.nodes()) {
    if (!node.is_terminal()) continue;
    snap.tree.mutable_node(node.node_id).expansions = 1;
    EXPECT_TRUE(mentions(check_tree_invariants(snap), node.node_id, "terminal node"));
    return;
  }
  FAIL() << "snapshot has no terminal node";
}

TEST(TreeCheck, IssueFormatting) {
  EXPECT_EQ(to_string(TreeIssue{7, "bad"}), "node 7: bad");
  EXPECT_EQ(to_string(TreeIssue{std::nullopt, "bad"}), "bad");
}

}  // namespace
}  // namespace mcts_repair
