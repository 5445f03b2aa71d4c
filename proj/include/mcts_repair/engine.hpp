#pragma once

#include <chrono>
#include <memory>
#include <vector>

#include "mcts_repair/backend.hpp"
#include "mcts_repair/core.hpp"
#include "mcts_repair/patch_tree.hpp"
#include "mcts_repair/report.hpp"
#include "mcts_repair/validation.hpp"

namespace mcts_repair {

/// Search over one bug: select, generate, evaluate, update, until the patch
/// budget is spent or no node can be expanded. Single-threaded over its tree.
class RepairEngine {
 public:
  /// `judge` defaults to `generator` (the model scores its own patches).
  RepairEngine(BugSpec bug, SearchConfig config, ModelBackend& generator, Validator& validator,
               ModelBackend* judge = nullptr);

  /// Validates the unmodified program to capture the original failing output.
  /// Called by the first iteration() if not called explicitly.
  void initialize();

  /// One select / generate / evaluate / update cycle producing
  /// min(branch, remaining budget) candidates. Returns one log entry per
  /// candidate; empty when the budget is already spent. Throws
  /// NoEligibleNode or BackendUnavailable.
  std::vector<IterationLogEntry> iteration();

  /// Loops iteration() to completion and assembles the report. Backend
  /// failures end the run with stop_reason = aborted instead of throwing.
  RepairReport run();

  const PatchTree& tree() const { return tree_; }
  const SearchConfig& config() const { return config_; }
  int generated() const { return generated_; }
  int remaining_budget() const { return config_.patch_budget - generated_; }
  bool has_plausible() const { return !plausible_.empty(); }

  /// Assembles a report from the current state.
  RepairReport report(StopReason reason, std::string abort_reason = {}) const;

 private:
  std::string feedback_for(const PatchNode& node, std::vector<std::string>& failing) const;

  BugSpec bug_;
  SearchConfig config_;
  ModelBackend& generator_;
  ModelBackend& judge_;
  Validator& validator_;
  PatchTree tree_;
  bool initialized_ = false;
  std::map<std::string, TestOutcome> baseline_outcomes_;
  std::string baseline_build_output_;
  int generated_ = 0;
  int iterations_ = 0;
  std::vector<NodeId> plausible_;
  std::vector<IterationLogEntry> log_;
  std::chrono::steady_clock::time_point started_;
};

/// Repairs one bug in its workspace with sandboxed validation.
RepairReport repair(const BugSpec& bug, ModelBackend& backend, const SearchConfig& config);

/// EM: a reference patch exists and matches after normalize_code.
bool exact_match(const std::string& candidate, const std::optional<std::string>& reference);

}  // namespace mcts_repair
