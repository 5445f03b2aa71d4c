#include "mcts_repair/core.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace mcts_repair {

namespace {

std::vector<std::string> split_lines_lf(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\f\v") == std::string_view::npos;
}

}  // namespace

void BugSpec::validate() const {
  auto fail = [this](const std::string& what) {
    throw InvalidBugSpec("bug '" + bug_id + "': " + what);
  };
  if (bug_id.empty()) throw InvalidBugSpec("bug_id is empty");
  if (buggy_file.empty()) fail("buggy_file is empty");
  if (buggy_file.is_absolute()) fail("buggy_file must be relative to workspace_root");
  if (buggy_region.first < 1 || buggy_region.last < buggy_region.first) {
    fail("buggy_region must be a non-empty 1-based range");
  }
  if (build_command.timeout_s <= 0) fail("build_command timeout must be > 0");
  if (test_command.command.empty()) fail("test_command is empty");
  if (test_command.timeout_s <= 0) fail("test_command timeout must be > 0");
  if (test_cases.empty()) fail("test_cases is empty");
  std::set<std::string> ids;
  for (const auto& t : test_cases) {
    if (t.test_id.empty()) fail("test case with empty test_id");
    if (!ids.insert(t.test_id).second) fail("duplicate test_id '" + t.test_id + "'");
  }
}

void BugSpec::validate_workspace() const {
  validate();
  const fs::path file = workspace_root / buggy_file;
  if (!fs::is_regular_file(file)) {
    throw InvalidBugSpec("bug '" + bug_id + "': buggy file not found: " + file.string());
  }
  auto lines = split_lines_lf(read_file(file));
  // A trailing newline produces one empty pseudo-line that is not part of the file.
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (buggy_region.last > static_cast<int>(lines.size())) {
    throw InvalidBugSpec("bug '" + bug_id + "': buggy_region " +
                         std::to_string(buggy_region.first) + "-" +
                         std::to_string(buggy_region.last) + " exceeds " +
                         std::to_string(lines.size()) + " lines");
  }
  std::string region;
  for (int i = buggy_region.first; i <= buggy_region.last; ++i) {
    if (i > buggy_region.first) region += '\n';
    region += lines[static_cast<std::size_t>(i - 1)];
  }
  if (region != buggy_code) {
    throw InvalidBugSpec("bug '" + bug_id + "': buggy_code does not match " +
                         buggy_file.string() + " at the declared region");
  }
}

Patch Patch::root_of(const BugSpec& bug) {
  return Patch{bug.bug_id + "#0", bug.buggy_code, PatchOrigin::root};
}

NodeStatus status_from_evaluation(const EvaluationRecord& eval) {
  if (eval.has(Adjustment::compile_failure)) return NodeStatus::compile_failed;
  if (eval.test_outcomes.empty()) return NodeStatus::partial;
  for (const auto& [id, outcome] : eval.test_outcomes) {
    if (outcome.status != TestStatus::pass) return NodeStatus::partial;
  }
  return NodeStatus::plausible;
}

void SearchConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidConfig(what); };
  if (!(exploration_C >= 0)) fail("exploration_C must be >= 0");
  if (!(beta >= 0 && beta <= 1)) fail("beta must lie in [0, 1]");
  if (n_judge_samples < 1) fail("n_judge_samples must be >= 1");
  if (branch < 1) fail("branch must be >= 1");
  if (max_expansion < 1) fail("max_expansion must be >= 1");
  if (patch_budget < 0) fail("patch_budget must be >= 0");
  if (!(temperature >= 0)) fail("temperature must be >= 0");
  if (max_tokens < 1) fail("max_tokens must be >= 1");
  if (test_sufficiency_threshold < 0) fail("test_sufficiency_threshold must be >= 0");
  if (!(price_per_1k_tokens >= 0)) fail("price_per_1k_tokens must be >= 0");
}

std::string normalize_code(std::string_view text) {
  std::string lf;
  lf.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      lf += '\n';
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      lf += text[i];
    }
  }

  std::vector<std::string> out;
  bool previous_blank = true;  // drops leading blank lines
  for (auto& line : split_lines_lf(lf)) {
    auto end = line.find_last_not_of(" \t\f\v");
    line.erase(end == std::string::npos ? 0 : end + 1);
    const bool blank = line.empty();
    if (blank && previous_blank) continue;
    out.push_back(std::move(line));
    previous_blank = blank;
  }
  while (!out.empty() && out.back().empty()) out.pop_back();

  std::string result;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) result += '\n';
    result += out[i];
  }
  return result;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoFailure("short write to " + path.string());
}

std::string_view to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::root: return "root";
    case NodeStatus::partial: return "partial";
    case NodeStatus::plausible: return "plausible";
    case NodeStatus::compile_failed: return "compile_failed";
  }
  return "?";
}

std::string_view to_string(JudgeStrategy s) {
  return s == JudgeStrategy::llm_judge ? "llm_judge" : "test_judge";
}

std::string_view to_string(TestStatus s) {
  switch (s) {
    case TestStatus::pass: return "pass";
    case TestStatus::fail: return "fail";
    case TestStatus::timeout: return "timeout";
    case TestStatus::error: return "error";
  }
  return "?";
}

std::string_view to_string(Adjustment a) {
  return a == Adjustment::compile_failure ? "compile_failure" : "identical_to_parent";
}

std::string_view to_string(SelectionPolicy p) {
  return p == SelectionPolicy::mcts ? "mcts" : "chain";
}

}  // namespace mcts_repair
