#include <cstdlib>

#include <gtest/gtest.h>

#include "mcts_repair/generation.hpp"
#include "mcts_repair/prompts.hpp"
#include "test_support.hpp"

namespace mcts_repair {
namespace {

using testing::scripted;

struct Fixture {
  testing::ShellBug toy;
  SearchConfig config;
  PatchNode root;
  PatchNode partial;

  Fixture() {
    root.patch = Patch::root_of(toy.bug);
    partial.node_id = 4;
    partial.patch = Patch{"toy1#4", "41", PatchOrigin::generated};
    partial.status = NodeStatus::partial;
    partial.expansions = 1;
  }

  GenerationContext ctx(const PatchNode& node, std::string feedback = "[t0] fail\nwanted 42\n") const {
    return GenerationContext{toy.bug, node, std::move(feedback), {"t0", "t1"}, config};
  }
};

TEST(Prompts, RenderSubstitutesKnownPlaceholdersOnce) {
  EXPECT_EQ(prompts::render("a {{x}} b {{y}}", {{"x", "{{y}}"}, {"y", "2"}}), "a {{y}} b 2");
  EXPECT_EQ(prompts::render("{{unknown}} {{", {}), "{{unknown}} {{");
  EXPECT_EQ(prompts::render("", {{"x", "1"}}), "");
}

TEST(RepairPrompt, CarriesBugContextAndFeedback) {
  Fixture f;
  const auto msgs = build_repair_prompt(f.ctx(f.root));
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[0].role, "system");
  EXPECT_EQ(msgs[1].role, "user");
  const std::string& user = msgs[1].content;
  EXPECT_NE(user.find("Bug `toy1` in file `value.txt`"), std::string::npos);
  EXPECT_NE(user.find("lines 2-2"), std::string::npos);
  EXPECT_NE(user.find("Failing tests: t0, t1"), std::string::npos);
  EXPECT_NE(user.find("wanted 42"), std::string::npos);
  EXPECT_EQ(user.find("previous repair attempt"), std::string::npos);
  EXPECT_EQ(user.find("{{"), std::string::npos);
}

TEST(RepairPrompt, IncludesPartialPatchOfSelectedNode) {
  Fixture f;
  const auto msgs = build_repair_prompt(f.ctx(f.partial));
  EXPECT_NE(msgs[1].content.find("previous repair attempt"), std::string::npos);
  EXPECT_NE(msgs[1].content.find("```\n41\n```"), std::string::npos);
}

TEST(RepairPrompt, IsDeterministicAndMatchesGolden) {
  Fixture f;
  const auto a = build_repair_prompt(f.ctx(f.partial));
  const auto b = build_repair_prompt(f.ctx(f.partial));
  EXPECT_EQ(a, b);

  const std::string rendered = "== system ==\n" + a[0].content + "\n== user ==\n" + a[1].content + "\n";
  const fs::path golden = testing::golden_dir() / "repair_prompt_partial.txt";
  if (std::getenv("MCTS_REPAIR_UPDATE_GOLDEN")) write_file(golden, rendered);
  ASSERT_TRUE(fs::exists(golden)) << "run with MCTS_REPAIR_UPDATE_GOLDEN=1 to create " << golden;
  EXPECT_EQ(rendered, read_file(golden));
}

TEST(ExtractPatch, TakesLastClosedFence) {
  EXPECT_EQ(extract_patch("text\n```python\nx = 1\n```\nmore\n```\ny = 2\n```"), "y = 2");
  EXPECT_EQ(extract_patch("```\na\r\n\r\nb\r\n```"), "a\n\nb");
  EXPECT_EQ(extract_patch("```\n```"), "");
  EXPECT_EQ(extract_patch("```\nunclosed"), std::nullopt);
  EXPECT_EQ(extract_patch("no code here"), std::nullopt);
  EXPECT_EQ(extract_patch("```\nkept\n```\n```\nunclosed"), "kept");
  EXPECT_EQ(extract_patch("  ```c\n  indented\n  ```"), "  indented");
}

TEST(Generation, DraftThenReflectionWithSummedTokens) {
  Fixture f;
  ScriptedBackend backend;
  auto r = scripted("41");
  r.final_patch = "42";
  r.reflection = "The constant is off by one.";
  backend.set_response(ScriptedBackend::key("toy1", 0, 0), r);
  backend.set_usage_per_call(100, 20);

  const auto recs = generate_candidates(backend, f.ctx(f.root));
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_TRUE(recs[0].parseable);
  EXPECT_EQ(recs[0].draft_patch, "41");
  EXPECT_EQ(recs[0].final_patch, "42");
  EXPECT_NE(recs[0].cot_trace.find("Reasoning about the fault."), std::string::npos);
  EXPECT_NE(recs[0].reflection.find("off by one"), std::string::npos);
  EXPECT_EQ(recs[0].prompt_tokens, 200);
  EXPECT_EQ(recs[0].completion_tokens, 40);

  const auto calls = backend.calls();
  ASSERT_EQ(calls.size(), 2u);
  EXPECT_EQ(calls[0].site.purpose, CallPurpose::repair);
  EXPECT_EQ(calls[1].site.purpose, CallPurpose::reflect);
}

TEST(Generation, ReflectionWithoutFenceKeepsDraft) {
  Fixture f;
  ScriptedBackend backend;
  auto r = scripted("41");
  r.final_patch.reset();
  backend.set_response(ScriptedBackend::key("toy1", 0, 0), r);
  const auto recs = generate_candidates(backend, f.ctx(f.root));
  EXPECT_EQ(recs[0].final_patch, "41");
}

TEST(Generation, UnparseableDraftSkipsReflection) {
  Fixture f;
  ScriptedBackend backend;  // no responses: prose only
  const auto recs = generate_candidates(backend, f.ctx(f.root));
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_FALSE(recs[0].parseable);
  EXPECT_TRUE(recs[0].final_patch.empty());
  EXPECT_EQ(backend.call_count(), 1u);

  ScriptedBackend empty_fence;
  empty_fence.set_response(ScriptedBackend::key("toy1", 0, 0), scripted(""));
  EXPECT_FALSE(generate_candidates(empty_fence, f.ctx(f.root))[0].parseable);
  EXPECT_EQ(empty_fence.call_count(), 1u);
}

TEST(Generation, ExpansionIndicesContinueFromSelectedNode) {
  Fixture f;
  ScriptedBackend backend;
  backend.set_response("toy1/4/*", scripted("v{{expansion}} of {{parent}}"));
  const auto recs = generate_candidates(backend, f.ctx(f.partial), 2);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].final_patch, "v1 of 4");
  EXPECT_EQ(recs[1].final_patch, "v2 of 4");
  EXPECT_THROW(generate_candidates(backend, f.ctx(f.partial), 0), InvalidConfig);
}

TEST(Generation, ReflectRejectsEmptyDraft) {
  Fixture f;
  ScriptedBackend backend;
  EXPECT_THROW(reflect(backend, f.ctx(f.root), {}, "", 0), InvalidConfig);
}

TEST(FailureFeedback, ListsNonPassingTestsInDeclarationOrder) {
  testing::ShellBug toy;
  std::map<std::string, TestOutcome> outcomes;
  outcomes["t2"] = {TestStatus::timeout, ""};
  outcomes["t1"] = {TestStatus::pass, ""};
  outcomes["t0"] = {TestStatus::fail, "got 1"};
  EXPECT_EQ(format_failure_feedback(toy.bug, outcomes), "[t0] fail\ngot 1\n[t2] timeout\n");
}

}  // namespace
}  // namespace mcts_repair
