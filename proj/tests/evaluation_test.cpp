#include <random>

#include <gtest/gtest.h>

#include "mcts_repair/evaluation.hpp"
#include "test_support.hpp"

namespace mcts_repair {
namespace {

using nlohmann::json;
using testing::scripted;

// Minimal judge fixture around a bug with `tests` declared tests.
struct Scene {
  testing::ShellBug toy;
  Patch parent{"toy1#0", "1", PatchOrigin::root};
  Patch candidate{"toy1#1", "41", PatchOrigin::generated};
  GenerationRecord gen;
  ValidationResult validation;
  SearchConfig config;
  ScriptedBackend backend;

  explicit Scene(int tests = 3) : toy(tests) {
    validation.compiled = true;
    for (const auto& t : toy.bug.test_cases) validation.outcomes[t.test_id] = TestStatus::fail;
  }

  JudgeContext ctx() const { return JudgeContext{toy.bug, candidate, parent, gen, validation, kRootId, 0}; }

  void judge(std::vector<json> scores) {
    backend.set_response(ScriptedBackend::key("toy1", 0, 0), scripted("41", std::move(scores)));
  }
};

double oracle_expectation(const std::vector<double>& scores) {
  long double sum = 0;
  for (double s : scores) sum += s < 0 ? 0.0L : s > 100 ? 1.0L : static_cast<long double>(s) / 100.0L;
  return static_cast<double>(sum / scores.size());
}

TEST(ClampScore, Table) {
  EXPECT_EQ(clamp_score(-20), 0.0);
  EXPECT_EQ(clamp_score(0), 0.0);
  EXPECT_EQ(clamp_score(73), 0.73);
  EXPECT_EQ(clamp_score(100), 1.0);
  EXPECT_EQ(clamp_score(150), 1.0);
}

TEST(ParseJudgeScore, LastLineNumber) {
  EXPECT_EQ(parse_judge_score("Looks fine.\n85\n"), 85.0);
  EXPECT_EQ(parse_judge_score("  72/100  "), 72.0);
  EXPECT_EQ(parse_judge_score("-5"), -5.0);
  EXPECT_EQ(parse_judge_score("+12.5"), 12.5);
  EXPECT_EQ(parse_judge_score("score 85"), std::nullopt);
  EXPECT_EQ(parse_judge_score("85\nthat is my score"), std::nullopt);
  EXPECT_EQ(parse_judge_score(""), std::nullopt);
  EXPECT_EQ(parse_judge_score("nan"), std::nullopt);
}

TEST(ChooseStrategy, ThresholdAndOverride) {
  SearchConfig c;
  testing::ShellBug twelve(12), ten(10), one(1);
  EXPECT_EQ(choose_strategy(twelve.bug, c), JudgeStrategy::test_judge);
  EXPECT_EQ(choose_strategy(ten.bug, c), JudgeStrategy::test_judge);
  EXPECT_EQ(choose_strategy(one.bug, c), JudgeStrategy::llm_judge);
  c.strategy_override = JudgeStrategy::llm_judge;
  EXPECT_EQ(choose_strategy(twelve.bug, c), JudgeStrategy::llm_judge);
}

TEST(LlmJudge, ScriptedExpectations) {
  struct Case {
    std::vector<double> scores;
    std::vector<double> rewards;
    double expected;
  };
  const std::vector<Case> cases = {
      {{50, 50, 50, 50, 50}, {0.5, 0.5, 0.5, 0.5, 0.5}, 0.5},
      {{40, 60, 50, 50, 50}, {0.4, 0.6, 0.5, 0.5, 0.5}, 0.5},
      {{-10, 120, 30, 30, 30}, {0, 1, 0.3, 0.3, 0.3}, 0.38},
  };
  for (const auto& c : cases) {
    Scene s;
    s.judge(std::vector<json>(c.scores.begin(), c.scores.end()));
    const auto rec = llm_judge(s.backend, s.ctx(), s.config);
    EXPECT_EQ(rec.raw_scores, c.scores);
    EXPECT_EQ(rec.per_sample_rewards, c.rewards);
    EXPECT_NEAR(rec.expected_reward, c.expected, 1e-12);
    EXPECT_EQ(s.backend.call_count(), 5u);
  }
}

TEST(LlmJudge, MatchesClampThenAverageOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> score(-50, 150);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> scores(5);
    for (auto& x : scores) x = score(rng);
    Scene s;
    s.judge(std::vector<json>(scores.begin(), scores.end()));
    const auto rec = llm_judge(s.backend, s.ctx(), s.config);
    EXPECT_NEAR(rec.expected_reward, oracle_expectation(scores), 1e-12);
  }
}

TEST(LlmJudge, UnparseableSampleIsReaskedOnceThenZero) {
  Scene s;
  auto r = scripted("41", {80, "I cannot decide.", 80, "nothing", 80});
  r.judge_reask = {"fine\n60"};
  s.backend.set_response(ScriptedBackend::key("toy1", 0, 0), r);
  auto rec = llm_judge(s.backend, s.ctx(), s.config);
  EXPECT_EQ(rec.raw_scores, (std::vector<double>{80, 60, 80, 60, 80}));
  EXPECT_EQ(s.backend.call_count(), 7u);

  Scene t;
  auto stubborn = scripted("41", {"no", 100});
  stubborn.judge_reask = {"still no"};
  t.backend.set_response(ScriptedBackend::key("toy1", 0, 0), stubborn);
  t.config.n_judge_samples = 2;
  rec = llm_judge(t.backend, t.ctx(), t.config);
  EXPECT_EQ(rec.raw_scores, (std::vector<double>{0, 100}));
  EXPECT_EQ(rec.expected_reward, 0.5);
}

TEST(LlmJudge, JudgeCallsCarryCandidateAndTokens) {
  Scene s;
  s.judge({70});
  s.backend.set_usage_per_call(10, 2);
  const auto rec = llm_judge(s.backend, s.ctx(), s.config);
  EXPECT_EQ(rec.prompt_tokens, 50);
  EXPECT_EQ(rec.completion_tokens, 10);
  for (const auto& call : s.backend.calls()) {
    EXPECT_EQ(call.site.purpose, CallPurpose::judge);
    EXPECT_EQ(call.site.candidate_patch, "41");
  }
}

TEST(JudgePrompt, ShowsPatchesAndTestResults) {
  Scene s;
  s.validation.outcomes["t1"] = TestStatus::pass;
  s.validation.failure_text["t0"] = "expected 42 got 41";
  s.gen.cot_trace = "my reasoning";
  const auto msgs = build_judge_prompt(s.ctx());
  ASSERT_EQ(msgs.size(), 2u);
  const std::string& user = msgs[1].content;
  EXPECT_NE(user.find("41"), std::string::npos);
  EXPECT_NE(user.find("- t1: pass"), std::string::npos);
  EXPECT_NE(user.find("- t0: fail"), std::string::npos);
  EXPECT_NE(user.find("expected 42 got 41"), std::string::npos);
  EXPECT_NE(user.find("my reasoning"), std::string::npos);
  EXPECT_EQ(user.find("{{"), std::string::npos);
}

TEST(TestJudge, PassedOverTotalForAllSmallSuites) {
  for (int total = 1; total <= 20; ++total) {
    for (int passed = 0; passed <= total; ++passed) {
      Scene s(total);
      for (int i = 0; i < total; ++i) {
        const auto id = "t" + std::to_string(i);
        s.validation.outcomes[id] = i < passed ? TestStatus::pass
                                    : i % 2    ? TestStatus::timeout
                                               : TestStatus::fail;
      }
      const auto rec = test_judge(s.ctx());
      EXPECT_EQ(rec.expected_reward, static_cast<double>(passed) / total);
      EXPECT_EQ(rec.per_sample_rewards.size(), 1u);
      EXPECT_TRUE(rec.raw_scores.empty());
      EXPECT_EQ(rec.strategy, JudgeStrategy::test_judge);
    }
  }
}

TEST(Evaluate, CompileFailureScoresMinusOneWithoutJudge) {
  Scene s;
  s.judge({90});
  s.validation.compiled = false;
  s.validation.outcomes.clear();
  auto rec = evaluate(s.backend, s.ctx(), s.config);
  EXPECT_EQ(rec.expected_reward, -1.0);
  EXPECT_TRUE(rec.has(Adjustment::compile_failure));
  EXPECT_EQ(s.backend.call_count(), 0u);
  EXPECT_EQ(rederive_expected_reward(rec), -1.0);
  EXPECT_EQ(status_from_evaluation(rec), NodeStatus::compile_failed);

  Scene u;
  u.judge({90});
  u.gen.parseable = false;
  EXPECT_EQ(evaluate(u.backend, u.ctx(), u.config).expected_reward, -1.0);
  u.gen.parseable = true;
  u.candidate.replacement_text.clear();
  EXPECT_EQ(evaluate(u.backend, u.ctx(), u.config).expected_reward, -1.0);
  EXPECT_EQ(u.backend.call_count(), 0u);
}

TEST(Evaluate, IdenticalToParentIsHalvedOnce) {
  Scene s;
  s.judge({80});
  s.candidate.replacement_text = "1\n\n";  // same as the parent after normalization
  const auto rec = evaluate(s.backend, s.ctx(), s.config);
  EXPECT_DOUBLE_EQ(rec.expected_reward, 0.4);
  EXPECT_EQ(rec.adjustments, std::set<Adjustment>{Adjustment::identical_to_parent});
  EXPECT_EQ(rederive_expected_reward(rec), rec.expected_reward);

  Scene d;
  d.judge({80});
  const auto plain = evaluate(d.backend, d.ctx(), d.config);
  EXPECT_DOUBLE_EQ(plain.expected_reward, 0.8);
  EXPECT_TRUE(plain.adjustments.empty());
}

TEST(Evaluate, AllPassingIsPlausibleWhateverTheJudgeSays) {
  Scene s;
  s.judge({10});
  for (auto& [id, st] : s.validation.outcomes) st = TestStatus::pass;
  const auto rec = evaluate(s.backend, s.ctx(), s.config);
  EXPECT_DOUBLE_EQ(rec.expected_reward, 0.1);
  EXPECT_EQ(status_from_evaluation(rec), NodeStatus::plausible);
}

TEST(Evaluate, TestJudgeIsPureInOutcomes) {
  Scene a(12), b(12);
  a.validation.outcomes["t3"] = b.validation.outcomes["t3"] = TestStatus::pass;
  const auto ra = evaluate(a.backend, a.ctx(), a.config);
  const auto rb = evaluate(b.backend, b.ctx(), b.config);
  EXPECT_EQ(ra, rb);
  EXPECT_DOUBLE_EQ(ra.expected_reward, 1.0 / 12);
  EXPECT_EQ(a.backend.call_count(), 0u);
}

}  // namespace
}  // namespace mcts_repair
