#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcts_repair/report.hpp"

namespace mcts_repair {

struct TreeIssue {
  std::optional<NodeId> node;
  std::string message;
};

std::string to_string(const TreeIssue& issue);

/// Per-node invariants: value ranges, compile-failure reward, terminal
/// nodes never expanded, expansion caps, visit counts (each node's N is one
/// plus its descendant count) and evaluation records that re-derive to the
/// stored reward.
std::vector<TreeIssue> check_tree_invariants(const TreeSnapshot& snapshot);

/// Rebuilds the tree from the root by re-running selection at every
/// recorded iteration and re-inserting the recorded children. Reports the
/// first iteration whose selection differs, and any node whose Q, N or
/// expansion count does not reproduce bit-exactly.
std::vector<TreeIssue> check_replay(const TreeSnapshot& snapshot);

/// Both checks; empty means the snapshot is healthy.
std::vector<TreeIssue> verify_snapshot(const TreeSnapshot& snapshot);

}  // namespace mcts_repair
