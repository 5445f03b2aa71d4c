#pragma once

// Domain types shared by every stage of the repair search.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcts_repair {

namespace fs = std::filesystem;

using NodeId = std::int64_t;
inline constexpr NodeId kRootId = 0;

// ─── Errors ───────────────────────────────────────────────────

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MCTS_REPAIR_ERROR(Name)              \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

MCTS_REPAIR_ERROR(InvalidBugSpec);
MCTS_REPAIR_ERROR(InvalidConfig);
MCTS_REPAIR_ERROR(IoFailure);
MCTS_REPAIR_ERROR(RegionOutOfRange);
MCTS_REPAIR_ERROR(NoEligibleNode);
MCTS_REPAIR_ERROR(UnknownParent);
MCTS_REPAIR_ERROR(UnknownNode);
MCTS_REPAIR_ERROR(IneligibleParent);
MCTS_REPAIR_ERROR(MalformedTree);
MCTS_REPAIR_ERROR(BackendUnavailable);
MCTS_REPAIR_ERROR(MalformedResponse);
MCTS_REPAIR_ERROR(MalformedEntry);
MCTS_REPAIR_ERROR(MalformedReport);

#undef MCTS_REPAIR_ERROR

// ─── Bug description ──────────────────────────────────────────

/// 1-based inclusive line range.
struct LineRange {
  int first = 1;
  int last = 1;

  int length() const { return last - first + 1; }
  bool operator==(const LineRange&) const = default;
};

struct CommandSpec {
  std::string command;
  double timeout_s = 60.0;

  bool operator==(const CommandSpec&) const = default;
};

struct TestCase {
  std::string test_id;
  // Substituted for `{test}` in the test command; empty when the suite runs whole.
  std::string invocation;

  bool operator==(const TestCase&) const = default;
};

struct BugSpec {
  std::string bug_id;
  fs::path workspace_root;
  fs::path buggy_file;  // relative to workspace_root
  LineRange buggy_region;
  std::string buggy_code;
  std::string context_code;
  CommandSpec build_command;
  CommandSpec test_command;
  std::vector<TestCase> test_cases;
  std::optional<std::string> reference_patch;

  /// Structural checks that need no filesystem access. Throws InvalidBugSpec.
  void validate() const;

  /// Checks the region against the file on disk (bounds and buggy_code
  /// equality). Throws InvalidBugSpec.
  void validate_workspace() const;

  bool operator==(const BugSpec&) const = default;
};

// ─── Patches and search records ───────────────────────────────

enum class PatchOrigin { root, generated };

struct Patch {
  std::string patch_id;
  std::string replacement_text;  // full replacement of the buggy region
  PatchOrigin origin = PatchOrigin::generated;

  static Patch root_of(const BugSpec& bug);

  bool operator==(const Patch&) const = default;
};

enum class NodeStatus { root, partial, plausible, compile_failed };

struct GenerationRecord {
  std::string cot_trace;
  std::string draft_patch;
  std::string reflection;
  std::string final_patch;
  bool parseable = true;
  bool tokens_estimated = false;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t wall_time_ms = 0;

  std::int64_t total_tokens() const { return prompt_tokens + completion_tokens; }
  bool operator==(const GenerationRecord&) const = default;
};

enum class JudgeStrategy { llm_judge, test_judge };

enum class TestStatus { pass, fail, timeout, error };

struct TestOutcome {
  TestStatus status = TestStatus::error;
  std::string failure_text;

  bool operator==(const TestOutcome&) const = default;
};

enum class Adjustment { compile_failure, identical_to_parent };

struct EvaluationRecord {
  JudgeStrategy strategy = JudgeStrategy::llm_judge;
  std::vector<double> raw_scores;
  std::vector<double> per_sample_rewards;
  std::set<Adjustment> adjustments;
  double expected_reward = 0.0;
  std::map<std::string, TestOutcome> test_outcomes;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  bool has(Adjustment a) const { return adjustments.count(a) != 0; }
  bool operator==(const EvaluationRecord&) const = default;
};

/// Status implied by an evaluation: compile failure, full pass, or neither.
NodeStatus status_from_evaluation(const EvaluationRecord& eval);

struct PatchNode {
  NodeId node_id = kRootId;
  Patch patch;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;
  double reward_R = 0.0;
  double quality_Q = 0.0;
  std::int64_t visits_N = 1;
  int expansions = 0;
  NodeStatus status = NodeStatus::root;
  int iteration = 0;  // iteration that created the node; 0 for the root
  std::optional<GenerationRecord> generation;
  std::optional<EvaluationRecord> evaluation;

  bool is_terminal() const {
    return status == NodeStatus::plausible || status == NodeStatus::compile_failed;
  }
  bool operator==(const PatchNode&) const = default;
};

// ─── Configuration ────────────────────────────────────────────

enum class SelectionPolicy {
  mcts,   // UCT argmax over eligible nodes
  chain,  // most recently added eligible node (serial trial-and-error)
};

struct SearchConfig {
  double exploration_C = 0.7;
  double beta = 0.8;
  int n_judge_samples = 5;
  int branch = 1;
  int max_expansion = 3;
  int patch_budget = 16;
  double temperature = 0.9;
  int max_tokens = 8000;
  int test_sufficiency_threshold = 10;
  bool early_stop_on_plausible = false;
  std::uint64_t rng_seed = 0;
  double price_per_1k_tokens = 0.0015;
  std::optional<JudgeStrategy> strategy_override;
  SelectionPolicy selection_policy = SelectionPolicy::mcts;

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;

  bool operator==(const SearchConfig&) const = default;
};

// ─── Text utilities ───────────────────────────────────────────

/// Canonical form used for exact-match and identical-to-parent checks:
/// CRLF/CR become LF, trailing whitespace is stripped per line, runs of
/// blank lines collapse to one, and leading/trailing blank lines are dropped.
std::string normalize_code(std::string_view text);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view content);

std::string_view to_string(NodeStatus s);
std::string_view to_string(JudgeStrategy s);
std::string_view to_string(TestStatus s);
std::string_view to_string(Adjustment a);
std::string_view to_string(SelectionPolicy p);

}  // namespace mcts_repair
