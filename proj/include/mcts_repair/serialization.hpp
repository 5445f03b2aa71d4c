#pragma once

// JSON schema for bug specs, configs, trees and reports. Field names are
// the struct field names; enums serialize as their lower_snake names.

#include <json.hpp>

#include "mcts_repair/core.hpp"
#include "mcts_repair/patch_tree.hpp"
#include "mcts_repair/report.hpp"

namespace mcts_repair {

using json = nlohmann::json;

inline constexpr const char* kTreeSchema = "mcts-repair/tree/v1";
inline constexpr const char* kReportSchema = "mcts-repair/report/v1";

NLOHMANN_JSON_SERIALIZE_ENUM(PatchOrigin, {{PatchOrigin::root, "root"},
                                           {PatchOrigin::generated, "generated"}})
NLOHMANN_JSON_SERIALIZE_ENUM(NodeStatus, {{NodeStatus::root, "root"},
                                          {NodeStatus::partial, "partial"},
                                          {NodeStatus::plausible, "plausible"},
                                          {NodeStatus::compile_failed, "compile_failed"}})
NLOHMANN_JSON_SERIALIZE_ENUM(JudgeStrategy, {{JudgeStrategy::llm_judge, "llm_judge"},
                                             {JudgeStrategy::test_judge, "test_judge"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TestStatus, {{TestStatus::pass, "pass"},
                                          {TestStatus::fail, "fail"},
                                          {TestStatus::timeout, "timeout"},
                                          {TestStatus::error, "error"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Adjustment, {{Adjustment::compile_failure, "compile_failure"},
                                          {Adjustment::identical_to_parent, "identical_to_parent"}})
NLOHMANN_JSON_SERIALIZE_ENUM(SelectionPolicy, {{SelectionPolicy::mcts, "mcts"},
                                               {SelectionPolicy::chain, "chain"}})
NLOHMANN_JSON_SERIALIZE_ENUM(StopReason, {{StopReason::budget, "budget"},
                                          {StopReason::exhausted, "exhausted"},
                                          {StopReason::early_stop, "early_stop"},
                                          {StopReason::aborted, "aborted"}})

void to_json(json& j, const LineRange& v);
void from_json(const json& j, LineRange& v);
void to_json(json& j, const CommandSpec& v);
void from_json(const json& j, CommandSpec& v);
void to_json(json& j, const TestCase& v);
void from_json(const json& j, TestCase& v);
void to_json(json& j, const BugSpec& v);
void from_json(const json& j, BugSpec& v);
void to_json(json& j, const Patch& v);
void from_json(const json& j, Patch& v);
void to_json(json& j, const GenerationRecord& v);
void from_json(const json& j, GenerationRecord& v);
void to_json(json& j, const TestOutcome& v);
void from_json(const json& j, TestOutcome& v);
void to_json(json& j, const EvaluationRecord& v);
void from_json(const json& j, EvaluationRecord& v);
void to_json(json& j, const PatchNode& v);
void from_json(const json& j, PatchNode& v);
void to_json(json& j, const SearchConfig& v);
void from_json(const json& j, SearchConfig& v);
void to_json(json& j, const TreeSnapshot& v);
void from_json(const json& j, TreeSnapshot& v);
void to_json(json& j, const PlausiblePatch& v);
void from_json(const json& j, PlausiblePatch& v);
void to_json(json& j, const IterationLogEntry& v);
void from_json(const json& j, IterationLogEntry& v);
void to_json(json& j, const RepairReport& v);
void from_json(const json& j, RepairReport& v);
void to_json(json& j, const ReportSummary& v);

/// Reads a bug spec; a relative workspace_root resolves against the spec
/// file's directory. Throws InvalidBugSpec on schema or invariant errors.
BugSpec load_bug_spec(const fs::path& path);

/// Reads a config file. Unknown keys are ignored so one file can also carry
/// client settings. Throws InvalidConfig.
SearchConfig load_search_config(const fs::path& path);

/// Accepts a tree snapshot file or a report (its embedded snapshot).
TreeSnapshot load_tree_snapshot(const fs::path& path);

RepairReport load_report(const fs::path& path);

json read_json_file(const fs::path& path);
void write_json_file(const fs::path& path, const json& j);

}  // namespace mcts_repair
