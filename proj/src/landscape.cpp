#include "mcts_repair/landscape.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <set>

#include "mcts_repair/engine.hpp"

namespace mcts_repair {

namespace {

constexpr std::string_view kStatePrefix = "state:";
constexpr std::string_view kGoalTest = "goal";

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Uniform in [-1, 1), a pure function of its inputs.
double noise_unit(std::uint64_t seed, const CallSite& site) {
  std::uint64_t h = fnv1a(std::to_string(seed));
  h = fnv1a("|" + site.candidate_patch + "|" + site.parent_patch + "|", h);
  h = fnv1a(std::to_string(site.expansion_index) + "|" + std::to_string(site.sample_index), h);
  // splitmix64 finaliser spreads the low-entropy tail.
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

const SyntheticLandscape::State* SyntheticLandscape::find(std::string_view state) const {
  for (const auto& s : states) {
    if (s.name == state) return &s;
  }
  return nullptr;
}

void SyntheticLandscape::validate() const {
  auto fail = [this](const std::string& what) {
    throw InvalidBugSpec("landscape '" + name + "': " + what);
  };
  if (!find(root)) fail("root state '" + root + "' is not declared");
  std::set<std::string> seen;
  for (const auto& s : states) {
    if (s.name.empty()) fail("state with empty name");
    if (!seen.insert(s.name).second) fail("duplicate state '" + s.name + "'");
    if (!(s.score >= 0.0 && s.score <= 100.0)) fail("score of '" + s.name + "' outside [0, 100]");
  }
  for (const auto& [from, targets] : edges) {
    if (!find(from)) fail("edge from unknown state '" + from + "'");
    for (const auto& to : targets) {
      if (!find(to)) fail("edge to unknown state '" + to + "'");
    }
  }
  if (judge_noise < 0) fail("judge_noise must be >= 0");
}

bool SyntheticLandscape::goal_reachable() const {
  std::set<std::string> seen{root};
  std::deque<std::string> queue{root};
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    if (const auto* s = find(cur); s && s->goal) return true;
    const auto it = edges.find(cur);
    if (it == edges.end()) continue;
    for (const auto& next : it->second) {
      if (seen.insert(next).second) queue.push_back(next);
    }
  }
  return false;
}

std::string SyntheticLandscape::patch_text(std::string_view state) {
  return std::string(kStatePrefix) + std::string(state);
}

std::string SyntheticLandscape::state_of(std::string_view text) {
  if (text.substr(0, kStatePrefix.size()) != kStatePrefix) return {};
  return std::string(text.substr(kStatePrefix.size()));
}

BugSpec SyntheticLandscape::bug_spec() const {
  BugSpec bug;
  bug.bug_id = "landscape-" + name;
  bug.workspace_root = ".";
  bug.buggy_file = "landscape.txt";
  bug.buggy_region = {1, 1};
  bug.buggy_code = patch_text(root);
  bug.test_command = {"landscape {test}", 5.0};
  bug.test_cases = {TestCase{std::string(kGoalTest), std::string(kGoalTest)}};
  return bug;
}

LandscapeBackend::LandscapeBackend(const SyntheticLandscape& landscape, std::uint64_t seed)
    : landscape_(landscape), seed_(seed) {}

Completion LandscapeBackend::complete(std::span<const ChatMessage>, const CallSite& site,
                                      const SamplingParams&) {
  Completion c;
  if (site.purpose == CallPurpose::judge) {
    const auto* state = landscape_.find(SyntheticLandscape::state_of(site.candidate_patch));
    const double base = state ? state->score : 0.0;
    const double score = std::round(base + landscape_.judge_noise * noise_unit(seed_, site));
    char buf[48];
    std::snprintf(buf, sizeof buf, "Landscape score.\n%.0f", score);
    c.text = buf;
    return c;
  }

  // Repair and reflection both answer with the k-th successor of the parent.
  const std::string parent = SyntheticLandscape::state_of(site.parent_patch);
  const auto it = landscape_.edges.find(parent);
  if (it == landscape_.edges.end() || site.expansion_index < 0 ||
      static_cast<std::size_t>(site.expansion_index) >= it->second.size()) {
    c.text = "No further change comes to mind from here.";
    return c;
  }
  c.text = "Moving to the next state.\n" +
           fence(SyntheticLandscape::patch_text(it->second[static_cast<std::size_t>(site.expansion_index)]));
  return c;
}

ValidationResult LandscapeValidator::validate(const BugSpec&, const Patch& patch) {
  ValidationResult v;
  const auto* state = landscape_.find(SyntheticLandscape::state_of(patch.replacement_text));
  if (!state) {
    v.build_output = "unknown state";
    return v;
  }
  v.compiled = true;
  const std::string test(kGoalTest);
  v.outcomes[test] = state->goal ? TestStatus::pass : TestStatus::fail;
  if (!state->goal) v.failure_text[test] = "state '" + state->name + "' is not a goal";
  return v;
}

LandscapeTrace run_landscape(const SyntheticLandscape& landscape, SearchConfig config,
                             SelectionPolicy policy) {
  landscape.validate();
  config.selection_policy = policy;
  config.strategy_override = JudgeStrategy::llm_judge;
  config.early_stop_on_plausible = false;

  LandscapeBackend backend(landscape, config.rng_seed);
  LandscapeValidator validator(landscape);
  RepairEngine engine(landscape.bug_spec(), config, backend, validator);

  LandscapeTrace trace;
  while (engine.remaining_budget() > 0) {
    std::vector<IterationLogEntry> entries;
    try {
      entries = engine.iteration();
    } catch (const NoEligibleNode&) {
      trace.exhausted = true;
      break;
    }
    if (entries.empty()) break;
    trace.selections.push_back(entries.front().selected);
    for (const auto& e : entries) {
      trace.expansions += 1;
      trace.generated.push_back(
          SyntheticLandscape::state_of(engine.tree().node(e.generated).patch.replacement_text));
      if (!trace.reached_goal && e.status == NodeStatus::plausible) {
        trace.reached_goal = true;
        trace.expansions_to_goal = trace.expansions;
      }
    }
    if (trace.reached_goal) break;
  }
  return trace;
}

SyntheticLandscape single_edge_landscape() {
  SyntheticLandscape l;
  l.name = "single-edge";
  l.states = {{"root", 0, false}, {"goal", 100, true}};
  l.edges = {{"root", {"goal"}}};
  return l;
}

SyntheticLandscape deceptive_corridor_landscape(double judge_noise) {
  SyntheticLandscape l;
  l.name = "deceptive-corridor";
  l.judge_noise = judge_noise;
  l.states = {{"root", 0, false}, {"B", 40, false}, {"goal", 100, true}, {"A", 85, false}};
  l.edges["root"] = {"A", "B"};
  l.edges["B"] = {"goal"};
  // Three levels of attractive states under A; the deepest level has no way forward.
  const std::vector<std::string> level1 = {"A1", "A2", "A3"};
  l.edges["A"] = level1;
  for (std::size_t i = 0; i < level1.size(); ++i) {
    l.states.push_back({level1[i], 88.0 - static_cast<double>(i), false});
    std::vector<std::string> level2;
    for (std::size_t j = 0; j < 3; ++j) {
      const std::string leaf = level1[i] + "." + std::to_string(j + 1);
      l.states.push_back({leaf, 90.0 - static_cast<double>(j), false});
      level2.push_back(leaf);
    }
    l.edges[level1[i]] = level2;
  }
  return l;
}

SyntheticLandscape goal_free_landscape() {
  SyntheticLandscape l;
  l.name = "goal-free";
  l.states = {{"root", 0, false}};
  std::vector<std::string> frontier = {"root"};
  // Complete ternary tree of depth 3 with middling scores.
  for (int depth = 1; depth <= 3; ++depth) {
    std::vector<std::string> next;
    for (const auto& parent : frontier) {
      for (int k = 1; k <= 3; ++k) {
        const std::string child = (parent == "root" ? std::string("s") : parent) + std::to_string(k);
        l.states.push_back({child, 30.0 + 10.0 * depth - k, false});
        l.edges[parent].push_back(child);
        next.push_back(child);
      }
    }
    frontier = std::move(next);
  }
  return l;
}

}  // namespace mcts_repair
