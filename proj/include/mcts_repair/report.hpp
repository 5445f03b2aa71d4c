#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcts_repair/core.hpp"
#include "mcts_repair/patch_tree.hpp"

namespace mcts_repair {

/// Tree plus the search parameters needed to replay it.
struct TreeSnapshot {
  SearchConfig config;
  PatchTree tree{Patch{}};

  bool operator==(const TreeSnapshot&) const = default;
};

struct PlausiblePatch {
  NodeId node_id = 0;
  std::string replacement_text;
  bool exact_match = false;

  bool operator==(const PlausiblePatch&) const = default;
};

struct IterationLogEntry {
  int iteration = 0;
  NodeId selected = 0;
  NodeId generated = 0;
  double reward = 0.0;
  NodeStatus status = NodeStatus::partial;

  bool operator==(const IterationLogEntry&) const = default;
};

enum class StopReason { budget, exhausted, early_stop, aborted };

struct RepairReport {
  std::string bug_id;
  std::vector<PlausiblePatch> plausible_patches;
  int total_patches_generated = 0;
  int iterations = 0;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t tokens_total = 0;
  std::int64_t wall_time_ms = 0;
  double estimated_cost = 0.0;
  StopReason stop_reason = StopReason::budget;
  std::string abort_reason;
  bool reference_available = false;
  TreeSnapshot tree_snapshot;
  std::vector<IterationLogEntry> per_iteration_log;

  bool aborted() const { return stop_reason == StopReason::aborted; }
  bool has_exact_match() const;
  bool operator==(const RepairReport&) const = default;
};

std::string_view to_string(StopReason r);

/// Aggregate across bugs: plausible-fix (PF) and exact-match (EM) counts
/// plus mean patches, tokens and money per bug.
struct ReportSummary {
  int bugs = 0;
  int plausible_fixes = 0;
  int exact_matches = 0;
  int aborted = 0;
  double mean_patches_per_bug = 0.0;
  double mean_tokens_per_bug = 0.0;
  double mean_time_ms_per_bug = 0.0;
  double mean_cost_per_bug = 0.0;
  double price_per_1k_tokens = 0.0;
};

/// When price_override is set, costs are recomputed from each report's token
/// totals; otherwise the reports' own estimated_cost values are averaged.
ReportSummary summarize(const std::vector<RepairReport>& reports,
                        std::optional<double> price_override = std::nullopt);

std::string format_summary_table(const ReportSummary& summary);

/// Short human-readable account of one run.
std::string format_report_summary(const RepairReport& report);

}  // namespace mcts_repair
