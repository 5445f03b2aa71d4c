#pragma once

#include <span>
#include <string>
#include <vector>

#include "mcts_repair/core.hpp"

namespace mcts_repair {

/// UCT score of a node. Infinite for unvisited nodes (or a parent that has
/// never been visited), otherwise Q + C * sqrt(2 ln(parent_visits) / visits).
double uct(double quality_Q, std::int64_t visits_N, std::int64_t parent_visits, double C);

/// A node may be expanded while it is the root or a partial patch and has
/// not reached max_expansion children.
bool eligible(const PatchNode& node, const SearchConfig& config);

/// Rooted tree of explored patches. Node ids are insertion order, so the
/// node list is append-only and nodes()[id].node_id == id.
class PatchTree {
 public:
  /// Root node: Q = 0, N = 1, status root.
  explicit PatchTree(Patch root_patch);

  /// Rebuilds a tree from a node list (deserialization, tests). Checks ids,
  /// root shape and parent/child link consistency; throws MalformedTree.
  static PatchTree from_nodes(std::vector<PatchNode> nodes);

  std::size_t size() const { return nodes_.size(); }
  NodeId next_id() const { return static_cast<NodeId>(nodes_.size()); }
  std::span<const PatchNode> nodes() const { return nodes_; }
  const PatchNode& node(NodeId id) const;
  const PatchNode& root() const { return nodes_.front(); }
  bool contains(NodeId id) const { return id >= 0 && id < next_id(); }

  /// Appends a child whose reward is eval.expected_reward and whose status is
  /// derived from the evaluation. Q starts at R, N at 1. Increments the
  /// parent's expansion count.
  NodeId add_child(NodeId parent_id, Patch patch, std::optional<GenerationRecord> gen,
                   EvaluationRecord eval, const SearchConfig& config, int iteration = 0);

  /// Forgetting-factor update of every ancestor of from_id, bottom-up:
  ///   Q'(a) = beta * (sum Q_j N_j / sum N_j) + (1 - beta) * Q(a)
  /// over a's children, followed by one extra visit for each ancestor.
  void backpropagate(NodeId from_id, double beta);

  std::vector<NodeId> ancestors(NodeId id) const;  // parent first, root last

  // Direct field access for snapshot replay and tests.
  PatchNode& mutable_node(NodeId id);

  bool operator==(const PatchTree&) const = default;

 private:
  PatchTree() = default;
  std::vector<PatchNode> nodes_;
};

/// The eligible node with maximal UCT; ties go to the smallest node id. The
/// root uses its own visit count as parent_visits. Throws NoEligibleNode.
NodeId select(const PatchTree& tree, const SearchConfig& config);

/// Chain baseline: the most recently added eligible node. Throws NoEligibleNode.
NodeId select_latest(const PatchTree& tree, const SearchConfig& config);

/// Dispatches on config.selection_policy.
NodeId select_by_policy(const PatchTree& tree, const SearchConfig& config);

/// Graphviz export, one vertex per node labelled id/status/Q/N.
std::string to_dot(const PatchTree& tree);

}  // namespace mcts_repair
