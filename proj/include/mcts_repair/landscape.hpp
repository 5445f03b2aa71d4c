#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcts_repair/backend.hpp"
#include "mcts_repair/core.hpp"
#include "mcts_repair/validation.hpp"

namespace mcts_repair {

/// An abstract patch space: each state is a "patch" with a judge score, and
/// edges list what the generator produces from a state, in expansion order.
/// States without a k-th edge make the k-th expansion unparseable, which the
/// evaluation pipeline scores as a compile failure.
struct SyntheticLandscape {
  struct State {
    std::string name;
    double score = 0.0;  // 0..100, what the judge answers before noise
    bool goal = false;
  };

  std::string name;
  std::string root = "root";
  std::vector<State> states;
  std::map<std::string, std::vector<std::string>> edges;
  double judge_noise = 0.0;  // uniform +/- this many score points per sample

  /// Throws InvalidBugSpec when the root or an edge target is unknown or a
  /// score lies outside [0, 100].
  void validate() const;
  bool goal_reachable() const;

  const State* find(std::string_view state) const;

  /// Patch text for a state.
  static std::string patch_text(std::string_view state);
  /// Inverse of patch_text; empty when the text is not a state patch.
  static std::string state_of(std::string_view patch_text);

  /// A one-test BugSpec whose buggy code is the root state.
  BugSpec bug_spec() const;
};

/// Generator and judge drawn from a landscape. Judge scores get
/// deterministic noise from (seed, candidate, parent, expansion, sample).
class LandscapeBackend : public ModelBackend {
 public:
  LandscapeBackend(const SyntheticLandscape& landscape, std::uint64_t seed);

  Completion complete(std::span<const ChatMessage> messages, const CallSite& site,
                      const SamplingParams& params) override;

 private:
  const SyntheticLandscape& landscape_;
  std::uint64_t seed_;
};

/// Goal states pass the single "goal" test; others compile and fail it.
/// Text that names no state does not compile.
class LandscapeValidator : public Validator {
 public:
  explicit LandscapeValidator(const SyntheticLandscape& landscape) : landscape_(landscape) {}

  ValidationResult validate(const BugSpec& bug, const Patch& patch) override;

 private:
  const SyntheticLandscape& landscape_;
};

struct LandscapeTrace {
  bool reached_goal = false;
  int expansions_to_goal = 0;  // generated candidates up to and including the first goal
  int expansions = 0;
  std::vector<NodeId> selections;      // selected node per iteration
  std::vector<std::string> generated;  // state names per candidate, "" when unparseable
  bool exhausted = false;              // ran out of eligible nodes before the budget
};

/// Runs the production engine over the landscape with the judge strategy
/// forced to llm_judge. Stops at the first goal, the budget, or exhaustion.
LandscapeTrace run_landscape(const SyntheticLandscape& landscape, SearchConfig config,
                             SelectionPolicy policy);

/// root -> goal.
SyntheticLandscape single_edge_landscape();
/// A high-scoring branch that dead-ends three levels down, next to a
/// modest branch (score 40) that leads to the goal.
SyntheticLandscape deceptive_corridor_landscape(double judge_noise = 5.0);
/// Plenty of states, no goal anywhere.
SyntheticLandscape goal_free_landscape();

}  // namespace mcts_repair
