#include "mcts_repair/serialization.hpp"

#include <fstream>

namespace mcts_repair {

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    v.reset();
  } else {
    v = it->template get<T>();
  }
}

template <typename T>
void get_or(const json& j, const char* key, T& v) {
  auto it = j.find(key);
  if (it != j.end() && !it->is_null()) v = it->template get<T>();
}

}  // namespace

void to_json(json& j, const LineRange& v) { j = json{{"first", v.first}, {"last", v.last}}; }

void from_json(const json& j, LineRange& v) {
  if (j.is_array()) {
    if (j.size() != 2) throw json::other_error::create(501, "buggy_region array needs 2 entries", &j);
    v.first = j[0].get<int>();
    v.last = j[1].get<int>();
    return;
  }
  j.at("first").get_to(v.first);
  j.at("last").get_to(v.last);
}

void to_json(json& j, const CommandSpec& v) {
  j = json{{"command", v.command}, {"timeout_s", v.timeout_s}};
}

void from_json(const json& j, CommandSpec& v) {
  if (j.is_string()) {
    v.command = j.get<std::string>();
    return;
  }
  j.at("command").get_to(v.command);
  get_or(j, "timeout_s", v.timeout_s);
}

void to_json(json& j, const TestCase& v) {
  j = json{{"test_id", v.test_id}, {"invocation", v.invocation}};
}

void from_json(const json& j, TestCase& v) {
  j.at("test_id").get_to(v.test_id);
  v.invocation.clear();
  get_or(j, "invocation", v.invocation);
}

void to_json(json& j, const BugSpec& v) {
  j = json{{"bug_id", v.bug_id},
           {"workspace_root", v.workspace_root.generic_string()},
           {"buggy_file", v.buggy_file.generic_string()},
           {"buggy_region", v.buggy_region},
           {"buggy_code", v.buggy_code},
           {"context_code", v.context_code},
           {"build_command", v.build_command},
           {"test_command", v.test_command},
           {"test_cases", v.test_cases}};
  put_optional(j, "reference_patch", v.reference_patch);
}

void from_json(const json& j, BugSpec& v) {
  j.at("bug_id").get_to(v.bug_id);
  v.workspace_root = j.value("workspace_root", std::string("."));
  v.buggy_file = j.at("buggy_file").get<std::string>();
  j.at("buggy_region").get_to(v.buggy_region);
  j.at("buggy_code").get_to(v.buggy_code);
  v.context_code = j.value("context_code", std::string());
  j.at("build_command").get_to(v.build_command);
  j.at("test_command").get_to(v.test_command);
  j.at("test_cases").get_to(v.test_cases);
  get_optional(j, "reference_patch", v.reference_patch);
}

void to_json(json& j, const Patch& v) {
  j = json{{"patch_id", v.patch_id}, {"replacement_text", v.replacement_text}, {"origin", v.origin}};
}

void from_json(const json& j, Patch& v) {
  j.at("patch_id").get_to(v.patch_id);
  j.at("replacement_text").get_to(v.replacement_text);
  j.at("origin").get_to(v.origin);
}

void to_json(json& j, const GenerationRecord& v) {
  j = json{{"cot_trace", v.cot_trace},
           {"draft_patch", v.draft_patch},
           {"reflection", v.reflection},
           {"final_patch", v.final_patch},
           {"parseable", v.parseable},
           {"tokens_estimated", v.tokens_estimated},
           {"prompt_tokens", v.prompt_tokens},
           {"completion_tokens", v.completion_tokens},
           {"wall_time_ms", v.wall_time_ms}};
}

void from_json(const json& j, GenerationRecord& v) {
  j.at("cot_trace").get_to(v.cot_trace);
  j.at("draft_patch").get_to(v.draft_patch);
  j.at("reflection").get_to(v.reflection);
  j.at("final_patch").get_to(v.final_patch);
  v.parseable = j.value("parseable", true);
  v.tokens_estimated = j.value("tokens_estimated", false);
  j.at("prompt_tokens").get_to(v.prompt_tokens);
  j.at("completion_tokens").get_to(v.completion_tokens);
  v.wall_time_ms = j.value("wall_time_ms", std::int64_t{0});
}

void to_json(json& j, const TestOutcome& v) {
  j = json{{"status", v.status}, {"failure_text", v.failure_text}};
}

void from_json(const json& j, TestOutcome& v) {
  j.at("status").get_to(v.status);
  v.failure_text = j.value("failure_text", std::string());
}

void to_json(json& j, const EvaluationRecord& v) {
  j = json{{"strategy", v.strategy},
           {"raw_scores", v.raw_scores},
           {"per_sample_rewards", v.per_sample_rewards},
           {"adjustments", v.adjustments},
           {"expected_reward", v.expected_reward},
           {"test_outcomes", v.test_outcomes},
           {"prompt_tokens", v.prompt_tokens},
           {"completion_tokens", v.completion_tokens}};
}

void from_json(const json& j, EvaluationRecord& v) {
  j.at("strategy").get_to(v.strategy);
  j.at("raw_scores").get_to(v.raw_scores);
  j.at("per_sample_rewards").get_to(v.per_sample_rewards);
  j.at("adjustments").get_to(v.adjustments);
  j.at("expected_reward").get_to(v.expected_reward);
  j.at("test_outcomes").get_to(v.test_outcomes);
  v.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  v.completion_tokens = j.value("completion_tokens", std::int64_t{0});
}

void to_json(json& j, const PatchNode& v) {
  j = json{{"node_id", v.node_id},
           {"patch", v.patch},
           {"children", v.children},
           {"reward_R", v.reward_R},
           {"quality_Q", v.quality_Q},
           {"visits_N", v.visits_N},
           {"expansions", v.expansions},
           {"status", v.status},
           {"iteration", v.iteration}};
  put_optional(j, "parent", v.parent);
  put_optional(j, "generation", v.generation);
  put_optional(j, "evaluation", v.evaluation);
}

void from_json(const json& j, PatchNode& v) {
  j.at("node_id").get_to(v.node_id);
  j.at("patch").get_to(v.patch);
  get_optional(j, "parent", v.parent);
  j.at("children").get_to(v.children);
  j.at("reward_R").get_to(v.reward_R);
  j.at("quality_Q").get_to(v.quality_Q);
  j.at("visits_N").get_to(v.visits_N);
  j.at("expansions").get_to(v.expansions);
  j.at("status").get_to(v.status);
  v.iteration = j.value("iteration", 0);
  get_optional(j, "generation", v.generation);
  get_optional(j, "evaluation", v.evaluation);
}

void to_json(json& j, const SearchConfig& v) {
  j = json{{"exploration_C", v.exploration_C},
           {"beta", v.beta},
           {"n_judge_samples", v.n_judge_samples},
           {"branch", v.branch},
           {"max_expansion", v.max_expansion},
           {"patch_budget", v.patch_budget},
           {"temperature", v.temperature},
           {"max_tokens", v.max_tokens},
           {"test_sufficiency_threshold", v.test_sufficiency_threshold},
           {"early_stop_on_plausible", v.early_stop_on_plausible},
           {"rng_seed", v.rng_seed},
           {"price_per_1k_tokens", v.price_per_1k_tokens},
           {"selection_policy", v.selection_policy}};
  put_optional(j, "strategy_override", v.strategy_override);
}

void from_json(const json& j, SearchConfig& v) {
  v = SearchConfig{};
  get_or(j, "exploration_C", v.exploration_C);
  get_or(j, "beta", v.beta);
  get_or(j, "n_judge_samples", v.n_judge_samples);
  get_or(j, "branch", v.branch);
  get_or(j, "max_expansion", v.max_expansion);
  get_or(j, "patch_budget", v.patch_budget);
  get_or(j, "temperature", v.temperature);
  get_or(j, "max_tokens", v.max_tokens);
  get_or(j, "test_sufficiency_threshold", v.test_sufficiency_threshold);
  get_or(j, "early_stop_on_plausible", v.early_stop_on_plausible);
  get_or(j, "rng_seed", v.rng_seed);
  get_or(j, "price_per_1k_tokens", v.price_per_1k_tokens);
  get_or(j, "selection_policy", v.selection_policy);
  get_optional(j, "strategy_override", v.strategy_override);
}

void to_json(json& j, const TreeSnapshot& v) {
  j = json{{"schema", kTreeSchema}, {"config", v.config}, {"nodes", json::array()}};
  for (const auto& node : v.tree.nodes()) j["nodes"].push_back(node);
}

void from_json(const json& j, TreeSnapshot& v) {
  j.at("config").get_to(v.config);
  auto nodes = j.at("nodes").get<std::vector<PatchNode>>();
  v.tree = PatchTree::from_nodes(std::move(nodes));
}

void to_json(json& j, const PlausiblePatch& v) {
  j = json{{"node_id", v.node_id},
           {"replacement_text", v.replacement_text},
           {"exact_match", v.exact_match}};
}

void from_json(const json& j, PlausiblePatch& v) {
  j.at("node_id").get_to(v.node_id);
  j.at("replacement_text").get_to(v.replacement_text);
  j.at("exact_match").get_to(v.exact_match);
}

void to_json(json& j, const IterationLogEntry& v) {
  j = json{{"iteration", v.iteration},
           {"selected", v.selected},
           {"generated", v.generated},
           {"reward", v.reward},
           {"status", v.status}};
}

void from_json(const json& j, IterationLogEntry& v) {
  j.at("iteration").get_to(v.iteration);
  j.at("selected").get_to(v.selected);
  j.at("generated").get_to(v.generated);
  j.at("reward").get_to(v.reward);
  j.at("status").get_to(v.status);
}

void to_json(json& j, const RepairReport& v) {
  j = json{{"schema", kReportSchema},
           {"bug_id", v.bug_id},
           {"plausible_patches", v.plausible_patches},
           {"total_patches_generated", v.total_patches_generated},
           {"iterations", v.iterations},
           {"prompt_tokens", v.prompt_tokens},
           {"completion_tokens", v.completion_tokens},
           {"tokens_total", v.tokens_total},
           {"wall_time_ms", v.wall_time_ms},
           {"estimated_cost", v.estimated_cost},
           {"stop_reason", v.stop_reason},
           {"abort_reason", v.abort_reason},
           {"reference_available", v.reference_available},
           {"per_iteration_log", v.per_iteration_log},
           {"tree_snapshot", v.tree_snapshot}};
}

void from_json(const json& j, RepairReport& v) {
  j.at("bug_id").get_to(v.bug_id);
  j.at("plausible_patches").get_to(v.plausible_patches);
  j.at("total_patches_generated").get_to(v.total_patches_generated);
  j.at("iterations").get_to(v.iterations);
  v.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  v.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  j.at("tokens_total").get_to(v.tokens_total);
  v.wall_time_ms = j.value("wall_time_ms", std::int64_t{0});
  j.at("estimated_cost").get_to(v.estimated_cost);
  v.stop_reason = j.value("stop_reason", StopReason::budget);
  v.abort_reason = j.value("abort_reason", std::string());
  v.reference_available = j.value("reference_available", false);
  j.at("per_iteration_log").get_to(v.per_iteration_log);
  j.at("tree_snapshot").get_to(v.tree_snapshot);
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoFailure(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

void to_json(json& j, const ReportSummary& v) {
  j = json{{"bugs", v.bugs},
           {"plausible_fixes", v.plausible_fixes},
           {"exact_matches", v.exact_matches},
           {"aborted", v.aborted},
           {"mean_patches_per_bug", v.mean_patches_per_bug},
           {"mean_tokens_per_bug", v.mean_tokens_per_bug},
           {"mean_time_ms_per_bug", v.mean_time_ms_per_bug},
           {"mean_cost_per_bug", v.mean_cost_per_bug},
           {"price_per_1k_tokens", v.price_per_1k_tokens}};
}

BugSpec load_bug_spec(const fs::path& path) {
  BugSpec bug;
  try {
    bug = read_json_file(path).get<BugSpec>();
  } catch (const json::exception& e) {
    throw InvalidBugSpec(path.string() + ": " + e.what());
  } catch (const IoFailure& e) {
    throw InvalidBugSpec(e.what());
  }
  if (bug.workspace_root.is_relative()) {
    bug.workspace_root = path.parent_path() / bug.workspace_root;
  }
  bug.workspace_root = bug.workspace_root.lexically_normal();
  bug.validate();
  return bug;
}

SearchConfig load_search_config(const fs::path& path) {
  if (!fs::exists(path)) throw InvalidConfig("config file not found: " + path.string());
  SearchConfig config;
  try {
    config = read_json_file(path).get<SearchConfig>();
  } catch (const json::exception& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  } catch (const IoFailure& e) {
    throw InvalidConfig(e.what());
  }
  config.validate();
  return config;
}

TreeSnapshot load_tree_snapshot(const fs::path& path) {
  try {
    json j = read_json_file(path);
    if (j.contains("tree_snapshot")) return j.at("tree_snapshot").get<TreeSnapshot>();
    return j.get<TreeSnapshot>();
  } catch (const json::exception& e) {
    throw MalformedTree(path.string() + ": " + e.what());
  } catch (const IoFailure& e) {
    throw MalformedTree(e.what());
  }
}

RepairReport load_report(const fs::path& path) {
  try {
    return read_json_file(path).get<RepairReport>();
  } catch (const json::exception& e) {
    throw MalformedReport(path.string() + ": " + e.what());
  } catch (const IoFailure& e) {
    throw MalformedReport(e.what());
  } catch (const MalformedTree& e) {
    throw MalformedReport(path.string() + ": " + e.what());
  }
}

}  // namespace mcts_repair
