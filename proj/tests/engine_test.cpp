#include <gtest/gtest.h>

#include "mcts_repair/engine.hpp"
#include "mcts_repair/serialization.hpp"
#include "mcts_repair/tree_check.hpp"
#include "test_support.hpp"

namespace mcts_repair {
namespace {

using testing::scripted;

class FailingBackend : public ModelBackend {
 public:
  Completion complete(std::span<const ChatMessage>, const CallSite&, const SamplingParams&) override {
    throw BackendUnavailable("endpoint down");
  }
};

RepairReport run_engine(const testing::ShellBug& toy, ScriptedBackend& backend, SearchConfig config) {
  WorkspaceValidator validator;
  RepairEngine engine(toy.bug, config, backend, validator);
  return engine.run();
}

TEST(Engine, FixesInFirstIterationAndFlagsExactMatch) {
  testing::ShellBug toy;
  ScriptedBackend backend;
  backend.set_response("toy1/0/0", scripted("42", {90}));
  SearchConfig config;
  config.early_stop_on_plausible = true;
  const RepairReport r = run_engine(toy, backend, config);
  EXPECT_EQ(r.stop_reason, StopReason::early_stop);
  EXPECT_EQ(r.total_patches_generated, 1);
  EXPECT_EQ(r.iterations, 1);
  ASSERT_EQ(r.plausible_patches.size(), 1u);
  EXPECT_EQ(r.plausible_patches[0].node_id, 1);
  EXPECT_TRUE(r.plausible_patches[0].exact_match);
  EXPECT_TRUE(r.has_exact_match());
  EXPECT_EQ(r.tree_snapshot.tree.node(1).status, NodeStatus::plausible);
  EXPECT_DOUBLE_EQ(r.tree_snapshot.tree.node(1).reward_R, 0.9);
}

TEST(Engine, CompileFailureDragsParentDown) {
  testing::ShellBug toy;
  ScriptedBackend backend;
  backend.set_response("toy1/0/0", scripted("41", {50}));
  backend.set_response("toy1/1/0", scripted("syntax-error", {100}));
  SearchConfig config;
  config.patch_budget = 2;
  const RepairReport r = run_engine(toy, backend, config);
  const auto& tree = r.tree_snapshot.tree;
  ASSERT_EQ(tree.size(), 3u);
  EXPECT_EQ(r.per_iteration_log[1].selected, 1);
  EXPECT_EQ(tree.node(2).status, NodeStatus::compile_failed);
  EXPECT_EQ(tree.node(2).reward_R, -1.0);
  // 0.8 * (-1) + 0.2 * 0.5
  EXPECT_NEAR(tree.node(1).quality_Q, -0.7, 1e-12);
  EXPECT_EQ(r.stop_reason, StopReason::budget);
  // Compile failures never reach the judge: 5 judge calls for node 1 only.
  int judge_calls = 0;
  for (const auto& c : backend.calls()) judge_calls += c.site.purpose == CallPurpose::judge;
  EXPECT_EQ(judge_calls, 5);
}

TEST(Engine, ZeroBudgetMakesNoCalls) {
  testing::ShellBug toy;
  ScriptedBackend backend;
  SearchConfig config;
  config.patch_budget = 0;
  const RepairReport r = run_engine(toy, backend, config);
  EXPECT_EQ(r.total_patches_generated, 0);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.tokens_total, 0);
  EXPECT_EQ(backend.call_count(), 0u);
  EXPECT_EQ(r.stop_reason, StopReason::budget);
  EXPECT_EQ(r.tree_snapshot.tree.size(), 1u);
}

TEST(Engine, ExhaustsWhenEveryExpansionFailsToCompile) {
  testing::ShellBug toy;
  ScriptedBackend backend;
  backend.set_response("toy1/*/*", scripted("syntax-error"));
  const RepairReport r = run_engine(toy, backend, SearchConfig{});
  EXPECT_EQ(r.stop_reason, StopReason::exhausted);
  EXPECT_EQ(r.total_patches_generated, 3);
  EXPECT_EQ(r.tree_snapshot.tree.root().expansions, 3);
  EXPECT_TRUE(r.plausible_patches.empty());
}

TEST(Engine, LastIterationIsCutToRemainingBudget) {
  testing::ShellBug toy;
  ScriptedBackend backend;
  backend.set_response("toy1/*/*", scripted("4{{expansion}}", {30}));
  SearchConfig config;
  config.branch = 2;
  config.patch_budget = 5;
  const RepairReport r = run_engine(toy, backend, config);
  EXPECT_EQ(r.total_patches_generated, 5);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_EQ(r.per_iteration_log.back().iteration, 3);
  EXPECT_EQ(r.per_iteration_log.size(), 5u);
}

TEST(Engine, ChainPolicyFollowsNewestNode) {
  testing::ShellBug toy;
  ScriptedBackend backend;
  backend.set_response("toy1/*/*", scripted("9{{parent}}", {20}));
  SearchConfig config;
  config.patch_budget = 4;
  config.selection_policy = SelectionPolicy::chain;
  const RepairReport r = run_engine(toy, backend, config);
  ASSERT_EQ(r.per_iteration_log.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(r.per_iteration_log[i].selected, static_cast<NodeId>(i));
}

TEST(Engine, SeparateJudgeBackendScoresCandidates) {
  testing::ShellBug toy;
  ScriptedBackend generator;
  generator.set_response("toy1/0/0", scripted("41", {10}));
  ScriptedBackend judge;
  judge.set_response("toy1/0/0", scripted("ignored", {70}));
  WorkspaceValidator validator;
  SearchConfig config;
  config.patch_budget = 1;
  RepairEngine engine(toy.bug, config, generator, validator, &judge);
  const RepairReport r = engine.run();
  EXPECT_DOUBLE_EQ(r.tree_snapshot.tree.node(1).reward_R, 0.7);
  EXPECT_EQ(generator.call_count(), 2u);
  EXPECT_EQ(judge.call_count(), 5u);
}

TEST(Engine, BackendFailureAbortsWithPartialReport) {
  testing::ShellBug toy;
  FailingBackend backend;
  WorkspaceValidator validator;
  RepairEngine engine(toy.bug, SearchConfig{}, backend, validator);
  const RepairReport r = engine.run();
  EXPECT_TRUE(r.aborted());
  EXPECT_NE(r.abort_reason.find("endpoint down"), std::string::npos);
  EXPECT_EQ(r.total_patches_generated, 0);
}

TEST(Engine, TokenTotalsAndCostComeFromNodes) {
  testing::ShellBug toy;
  ScriptedBackend backend;
  backend.set_response("toy1/*/*", scripted("4{{expansion}}", {30}));
  backend.set_usage_per_call(500, 125);
  SearchConfig config;
  config.patch_budget = 2;
  const RepairReport r = run_engine(toy, backend, config);
  // Per candidate: repair + reflect + 5 judge samples.
  EXPECT_EQ(r.tokens_total, 2 * 7 * 625);
  EXPECT_EQ(r.tokens_total, backend.total_tokens());
  EXPECT_DOUBLE_EQ(r.estimated_cost, r.tokens_total / 1000.0 * 0.0015);
}

TEST(Engine, RootRecordsBaselineOutcomes) {
  testing::ShellBug toy;
  ScriptedBackend backend;
  WorkspaceValidator validator;
  RepairEngine engine(toy.bug, SearchConfig{}, backend, validator);
  engine.initialize();
  const auto& root = engine.tree().root();
  ASSERT_TRUE(root.evaluation.has_value());
  EXPECT_EQ(root.evaluation->test_outcomes.size(), 3u);
  EXPECT_EQ(root.evaluation->test_outcomes.at("t0").status, TestStatus::fail);
}

TEST(Engine, RunsAreDeterministicAndReplayable) {
  auto once = [] {
    testing::ShellBug toy;
    ScriptedBackend backend;
    backend.set_response("toy1/*/*", scripted("4{{expansion}}{{parent}}", {35, 60}));
    backend.set_response("toy1/3/0", scripted("42", {90}));
    const RepairReport r = run_engine(toy, backend, SearchConfig{});
    EXPECT_TRUE(verify_snapshot(r.tree_snapshot).empty());
    json j = r;
    testing::mask_wall_time(j);
    return j.dump();
  };
  EXPECT_EQ(once(), once());
}

TEST(Engine, RejectsInvalidConfig) {
  testing::ShellBug toy;
  ScriptedBackend backend;
  WorkspaceValidator validator;
  SearchConfig config;
  config.beta = 3;
  EXPECT_THROW(RepairEngine(toy.bug, config, backend, validator), InvalidConfig);
}

TEST(ExactMatch, NormalizesAndNeedsReference) {
  EXPECT_TRUE(exact_match("x = 1  \r\n", std::string("x = 1")));
  EXPECT_FALSE(exact_match("x = 1", std::nullopt));
  EXPECT_FALSE(exact_match("x = 2", std::string("x = 1")));
}

}  // namespace
}  // namespace mcts_repair
