#include "mcts_repair/patch_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace mcts_repair {

double uct(double quality_Q, std::int64_t visits_N, std::int64_t parent_visits, double C) {
  if (visits_N <= 0 || parent_visits <= 0) return std::numeric_limits<double>::infinity();
  const double explore =
      std::sqrt(2.0 * std::log(static_cast<double>(parent_visits)) / static_cast<double>(visits_N));
  return quality_Q + C * explore;
}

bool eligible(const PatchNode& node, const SearchConfig& config) {
  const bool open = node.status == NodeStatus::root || node.status == NodeStatus::partial;
  return open && node.expansions < config.max_expansion;
}

PatchTree::PatchTree(Patch root_patch) {
  PatchNode root;
  root.node_id = kRootId;
  root.patch = std::move(root_patch);
  root.patch.origin = PatchOrigin::root;
  root.status = NodeStatus::root;
  root.reward_R = 0.0;
  root.quality_Q = 0.0;
  root.visits_N = 1;
  nodes_.push_back(std::move(root));
}

PatchTree PatchTree::from_nodes(std::vector<PatchNode> nodes) {
  if (nodes.empty()) throw MalformedTree("tree has no nodes");
  const auto n = static_cast<NodeId>(nodes.size());
  for (NodeId id = 0; id < n; ++id) {
    const auto& node = nodes[static_cast<std::size_t>(id)];
    const std::string where = "node " + std::to_string(id) + ": ";
    if (node.node_id != id) throw MalformedTree(where + "node_id does not match position");
    if (id == kRootId) {
      if (node.parent) throw MalformedTree(where + "root has a parent");
      if (node.status != NodeStatus::root) throw MalformedTree(where + "root status is not 'root'");
    } else {
      if (!node.parent) throw MalformedTree(where + "non-root node without parent");
      // Parents precede children in insertion order, which also rules out cycles.
      if (*node.parent < 0 || *node.parent >= id) {
        throw MalformedTree(where + "parent id must precede the node");
      }
      if (node.status == NodeStatus::root) throw MalformedTree(where + "non-root node with status root");
      const auto& siblings = nodes[static_cast<std::size_t>(*node.parent)].children;
      if (std::count(siblings.begin(), siblings.end(), id) != 1) {
        throw MalformedTree(where + "parent does not list the node exactly once");
      }
    }
    for (NodeId child : node.children) {
      if (child <= id || child >= n || nodes[static_cast<std::size_t>(child)].parent != id) {
        throw MalformedTree(where + "child link " + std::to_string(child) + " is inconsistent");
      }
    }
  }
  PatchTree tree;
  tree.nodes_ = std::move(nodes);
  return tree;
}

const PatchNode& PatchTree::node(NodeId id) const {
  if (!contains(id)) throw UnknownNode("unknown node " + std::to_string(id));
  return nodes_[static_cast<std::size_t>(id)];
}

PatchNode& PatchTree::mutable_node(NodeId id) {
  if (!contains(id)) throw UnknownNode("unknown node " + std::to_string(id));
  return nodes_[static_cast<std::size_t>(id)];
}

NodeId PatchTree::add_child(NodeId parent_id, Patch patch, std::optional<GenerationRecord> gen,
                            EvaluationRecord eval, const SearchConfig& config, int iteration) {
  if (!contains(parent_id)) throw UnknownParent("unknown parent " + std::to_string(parent_id));
  if (!eligible(nodes_[static_cast<std::size_t>(parent_id)], config)) {
    throw IneligibleParent("node " + std::to_string(parent_id) + " cannot be expanded");
  }

  PatchNode child;
  child.node_id = next_id();
  child.patch = std::move(patch);
  child.patch.origin = PatchOrigin::generated;
  child.parent = parent_id;
  child.status = status_from_evaluation(eval);
  child.reward_R = std::clamp(eval.expected_reward, -1.0, 1.0);
  child.quality_Q = child.reward_R;
  child.visits_N = 1;
  child.expansions = 0;
  child.iteration = iteration;
  child.generation = std::move(gen);
  child.evaluation = std::move(eval);

  const NodeId id = child.node_id;
  nodes_.push_back(std::move(child));
  auto& parent = nodes_[static_cast<std::size_t>(parent_id)];
  parent.children.push_back(id);
  parent.expansions += 1;
  return id;
}

std::vector<NodeId> PatchTree::ancestors(NodeId id) const {
  std::vector<NodeId> chain;
  for (auto p = node(id).parent; p; p = nodes_[static_cast<std::size_t>(*p)].parent) {
    chain.push_back(*p);
  }
  return chain;
}

void PatchTree::backpropagate(NodeId from_id, double beta) {
  const auto chain = ancestors(from_id);
  for (NodeId a : chain) {
    auto& node = nodes_[static_cast<std::size_t>(a)];
    double weighted = 0.0;
    double weight = 0.0;
    for (NodeId c : node.children) {
      const auto& child = nodes_[static_cast<std::size_t>(c)];
      weighted += child.quality_Q * static_cast<double>(child.visits_N);
      weight += static_cast<double>(child.visits_N);
    }
    if (weight > 0) {
      const double updated = beta * (weighted / weight) + (1.0 - beta) * node.quality_Q;
      // Convex combination; the clamp only absorbs last-ulp rounding.
      node.quality_Q = std::clamp(updated, -1.0, 1.0);
    }
  }
  // from_id itself was counted at insertion.
  for (NodeId a : chain) nodes_[static_cast<std::size_t>(a)].visits_N += 1;
}

NodeId select(const PatchTree& tree, const SearchConfig& config) {
  std::optional<NodeId> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& node : tree.nodes()) {
    if (!eligible(node, config)) continue;
    const std::int64_t parent_visits =
        node.parent ? tree.node(*node.parent).visits_N : node.visits_N;
    const double score = uct(node.quality_Q, node.visits_N, parent_visits, config.exploration_C);
    if (!best || score > best_score) {
      best = node.node_id;
      best_score = score;
    }
  }
  if (!best) throw NoEligibleNode("no expandable node left in the patch tree");
  return *best;
}

NodeId select_latest(const PatchTree& tree, const SearchConfig& config) {
  const auto nodes = tree.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    if (eligible(*it, config)) return it->node_id;
  }
  throw NoEligibleNode("no expandable node left in the patch tree");
}

NodeId select_by_policy(const PatchTree& tree, const SearchConfig& config) {
  return config.selection_policy == SelectionPolicy::chain ? select_latest(tree, config)
                                                           : select(tree, config);
}

std::string to_dot(const PatchTree& tree) {
  std::ostringstream out;
  out << "digraph patch_tree {\n";
  out << "  node [shape=box, fontname=\"monospace\"];\n";
  for (const auto& node : tree.nodes()) {
    char q[32];
    std::snprintf(q, sizeof q, "%.4f", node.quality_Q);
    const char* color = "black";
    if (node.status == NodeStatus::plausible) color = "darkgreen";
    if (node.status == NodeStatus::compile_failed) color = "red";
    out << "  n" << node.node_id << " [label=\"" << node.node_id << "\\n" << to_string(node.status)
        << "\\nQ=" << q << " N=" << node.visits_N << "\", color=" << color << "];\n";
  }
  for (const auto& node : tree.nodes()) {
    for (NodeId c : node.children) out << "  n" << node.node_id << " -> n" << c << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace mcts_repair
