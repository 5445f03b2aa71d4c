#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "mcts_repair/corpus.hpp"
#include "mcts_repair/serialization.hpp"
#include "mcts_repair/subprocess.hpp"
#include "test_support.hpp"

namespace mcts_repair {
namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "mcts-repair");
  std::ostringstream out, err;
  Invocation r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path gcd_dir() { return testing::corpus_dir() / "quix-gcd"; }

std::vector<std::string> gcd_repair_args(const testing::TempDir& out) {
  return {"repair",   "--bug", (gcd_dir() / "bugspec.json").string(), "--backend",
          "scripted:" + (gcd_dir() / "fixture.json").string(), "--out", out.path().string()};
}

TEST(Cli, RepairMatchesLibraryRun) {
  testing::TempDir out;
  const auto r = cli_run(gcd_repair_args(out));
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("bug quix-gcd:"), std::string::npos);

  json from_cli = read_json_file(out / "quix-gcd.report.json");
  const auto entry = load_corpus_entry(gcd_dir());
  json from_lib = run_corpus({entry}, SearchConfig{}).front();
  testing::mask_wall_time(from_cli);
  testing::mask_wall_time(from_lib);
  EXPECT_EQ(from_cli, from_lib);

  EXPECT_EQ(read_json_file(out / "quix-gcd.tree.json"), from_cli["tree_snapshot"]);
  EXPECT_TRUE(fs::exists(out / "quix-gcd.summary.txt"));
}

TEST(Cli, BudgetZeroGeneratesNothing) {
  testing::TempDir out;
  auto args = gcd_repair_args(out);
  args.insert(args.end(), {"--budget", "0"});
  const auto r = cli_run(args);
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto report = load_report(out / "quix-gcd.report.json");
  EXPECT_EQ(report.total_patches_generated, 0);
  EXPECT_EQ(report.tree_snapshot.tree.size(), 1u);
}

TEST(Cli, MissingConfigIsBadInput) {
  testing::TempDir out;
  auto args = gcd_repair_args(out);
  args.insert(args.end(), {"--config", (out / "nope.json").string()});
  const auto r = cli_run(args);
  EXPECT_EQ(r.code, cli::kBadInput);
  EXPECT_NE(r.err.find("nope.json"), std::string::npos);
}

TEST(Cli, LiveBackendWithoutKeyIsBadInput) {
  testing::TempDir out;
  ::unsetenv(kApiKeyEnv);
  const auto r = cli_run({"repair", "--bug", (gcd_dir() / "bugspec.json").string(), "--out", out.path().string()});
  EXPECT_EQ(r.code, cli::kBadInput);
  EXPECT_NE(r.err.find(kApiKeyEnv), std::string::npos);
}

TEST(Cli, UnreachableEndpointIsBackendFailure) {
  testing::TempDir out;
  write_file(out / "cfg.json", R"({"base_url": "http://127.0.0.1:9/v1", "patch_budget": 1})");
  ::setenv(kApiKeyEnv, "test-key", 1);
  // Refused connections are retried with backoff, so this takes several seconds.
  const auto r = cli_run({"repair", "--bug", (gcd_dir() / "bugspec.json").string(), "--config",
                          (out / "cfg.json").string(), "--out", out.path().string()});
  ::unsetenv(kApiKeyEnv);
  EXPECT_EQ(r.code, cli::kBackendFailure) << r.err;
  EXPECT_TRUE(load_report(out / "quix-gcd.report.json").aborted());
}

TEST(Cli, ReportAggregatesCost) {
  testing::TempDir dir;
  for (const char* name : {"a", "b"}) {
    RepairReport r;
    r.bug_id = name;
    r.tokens_total = 40000;
    r.estimated_cost = 0.06;
    if (name[0] == 'a') r.plausible_patches.push_back({1, "x", true});
    write_json_file(dir / (std::string(name) + ".json"), json(r));
  }
  const auto r = cli_run({"report", (dir / "a.json").string(), (dir / "b.json").string(), "--price", "0.0015",
                          "--json", "-"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("Money/Bug ($)   0.0600"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("EM              1"), std::string::npos) << r.out;
  const auto brace = r.out.find('{');
  ASSERT_NE(brace, std::string::npos);
  const json summary = json::parse(r.out.substr(brace));
  EXPECT_EQ(summary["mean_cost_per_bug"], 0.06);
  EXPECT_EQ(summary["plausible_fixes"], 1);
}

TEST(Cli, ReportOfNothing) {
  const auto r = cli_run({"report"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_EQ(r.out, "Bugs            0\n");
}

TEST(Cli, MalformedReportIsBadInput) {
  testing::TempDir dir;
  write_file(dir / "bad.json", "{ not json");
  EXPECT_EQ(cli_run({"report", (dir / "bad.json").string()}).code, cli::kBadInput);
}

class CliTree : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto r = cli_run(gcd_repair_args(out_));
    ASSERT_EQ(r.code, cli::kOk) << r.err;
  }
  fs::path tree() const { return out_ / "quix-gcd.tree.json"; }
  testing::TempDir out_;
};

TEST_F(CliTree, VerifyAcceptsEngineSnapshots) {
  const auto r = cli_run({"tree", tree().string(), "--verify"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("invariants and replay hold"), std::string::npos);
  EXPECT_EQ(cli_run({"tree", (out_ / "quix-gcd.report.json").string(), "--verify"}).code, cli::kOk);
}

TEST_F(CliTree, VerifyNamesCorruptedNode) {
  json j = read_json_file(tree());
  j["nodes"][1]["visits_N"] = j["nodes"][1]["visits_N"].get<int>() + 5;
  write_json_file(tree(), j);
  const auto r = cli_run({"tree", tree().string(), "--verify"});
  EXPECT_EQ(r.code, cli::kViolations);
  EXPECT_NE(r.err.find("violation: node 1:"), std::string::npos) << r.err;
}

TEST_F(CliTree, DotOutput) {
  const auto r = cli_run({"tree", tree().string(), "--dot"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_EQ(r.out.rfind("digraph", 0), 0u);
  EXPECT_NE(r.out.find("n0 -> n1"), std::string::npos);
}

TEST_F(CliTree, ArgumentErrors) {
  EXPECT_EQ(cli_run({"tree", tree().string()}).code, cli::kBadInput);
  EXPECT_EQ(cli_run({"tree", (out_ / "missing.json").string(), "--verify"}).code, cli::kBadInput);
  EXPECT_EQ(cli_run({"frobnicate"}).code, cli::kBadInput);
  EXPECT_EQ(cli_run({}).code, cli::kBadInput);
}

TEST(CliBinary, ExitCodesPropagate) {
  testing::TempDir dir;
  const std::string bin = testing::cli_path().string();
  auto r = run_shell(bin + " report", dir.path(), std::chrono::seconds(30));
  EXPECT_EQ(r.exit_code, 0) << r.output;
  r = run_shell(bin + " tree missing.json --verify", dir.path(), std::chrono::seconds(30));
  EXPECT_EQ(r.exit_code, 2) << r.output;
  r = run_shell(bin + " --help", dir.path(), std::chrono::seconds(30));
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.output.find("repair"), std::string::npos);
}

}  // namespace
}  // namespace mcts_repair
