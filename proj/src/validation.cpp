#include "mcts_repair/validation.hpp"

#include <cstdlib>
#include <vector>

#include "mcts_repair/subprocess.hpp"

namespace mcts_repair {

namespace {

std::chrono::milliseconds to_ms(double seconds) {
  return std::chrono::milliseconds(static_cast<std::int64_t>(seconds * 1000.0));
}

std::string scrub(std::string text, const fs::path& sandbox_dir) {
  const std::string needle = sandbox_dir.string();
  if (needle.empty()) return text;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos)) {
    text.replace(pos, needle.size(), kWorkspacePlaceholder);
    pos += kWorkspacePlaceholder.size();
  }
  return text;
}

std::string tail(std::string text, std::size_t limit) {
  if (text.size() > limit) text.erase(0, text.size() - limit);
  return text;
}

std::string substitute_test(std::string command, const std::string& invocation) {
  static constexpr std::string_view kPlaceholder = "{test}";
  for (auto pos = command.find(kPlaceholder); pos != std::string::npos;
       pos = command.find(kPlaceholder, pos)) {
    command.replace(pos, kPlaceholder.size(), invocation);
    pos += invocation.size();
  }
  return command;
}

}  // namespace

bool ValidationResult::plausible() const {
  if (!compiled || outcomes.empty()) return false;
  for (const auto& [id, status] : outcomes) {
    if (status != TestStatus::pass) return false;
  }
  return true;
}

int ValidationResult::passed() const {
  int n = 0;
  for (const auto& [id, status] : outcomes) n += status == TestStatus::pass;
  return n;
}

std::map<std::string, TestOutcome> ValidationResult::test_outcomes() const {
  std::map<std::string, TestOutcome> out;
  for (const auto& [id, status] : outcomes) {
    TestOutcome o{status, {}};
    if (auto it = failure_text.find(id); it != failure_text.end()) o.failure_text = it->second;
    out.emplace(id, std::move(o));
  }
  return out;
}

// ─── Sandbox ──────────────────────────────────────────────────

Sandbox Sandbox::create(const fs::path& workspace, const fs::path& parent) {
  std::error_code ec;
  const fs::path base = parent.empty() ? fs::temp_directory_path(ec) : parent;
  if (ec) throw IoFailure("no temp directory: " + ec.message());
  fs::create_directories(base, ec);
  std::string pattern = (base / "mcts-repair-XXXXXX").string();
  if (::mkdtemp(pattern.data()) == nullptr) throw IoFailure("mkdtemp failed under " + base.string());

  fs::path root(pattern);
  fs::path dir = root / "ws";
  fs::copy(workspace, dir, fs::copy_options::recursive | fs::copy_options::copy_symlinks, ec);
  if (ec) {
    fs::remove_all(root, ec);
    throw IoFailure("cannot copy workspace " + workspace.string() + ": " + ec.message());
  }
  return Sandbox(std::move(root), std::move(dir));
}

Sandbox::Sandbox(Sandbox&& other) noexcept
    : root_(std::exchange(other.root_, {})), dir_(std::exchange(other.dir_, {})) {}

Sandbox& Sandbox::operator=(Sandbox&& other) noexcept {
  if (this != &other) {
    std::error_code ec;
    if (!root_.empty()) fs::remove_all(root_, ec);
    root_ = std::exchange(other.root_, {});
    dir_ = std::exchange(other.dir_, {});
  }
  return *this;
}

Sandbox::~Sandbox() {
  std::error_code ec;
  if (!root_.empty()) fs::remove_all(root_, ec);
}

// ─── Patch application ────────────────────────────────────────

std::string splice_region(std::string_view content, LineRange region, std::string_view replacement) {
  // Line i spans [starts[i], starts[i+1]); a missing final newline is kept as is.
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < content.size(); ++i) {
    if (content[i] == '\n' && i + 1 < content.size()) starts.push_back(i + 1);
  }
  const int line_count = content.empty() ? 0 : static_cast<int>(starts.size());
  if (region.first < 1 || region.last < region.first || region.last > line_count) {
    throw RegionOutOfRange("region " + std::to_string(region.first) + "-" +
                           std::to_string(region.last) + " outside a " + std::to_string(line_count) +
                           "-line file");
  }
  const std::size_t begin = starts[static_cast<std::size_t>(region.first - 1)];
  const std::size_t end = static_cast<std::size_t>(region.last) < starts.size()
                              ? starts[static_cast<std::size_t>(region.last)]
                              : content.size();
  const bool region_had_newline = end > begin && content[end - 1] == '\n';

  std::string out(content.substr(0, begin));
  out += replacement;
  if (region_had_newline && !replacement.empty() && replacement.back() != '\n') out += '\n';
  out += content.substr(end);
  return out;
}

void apply_patch(const BugSpec& bug, const Patch& patch, const fs::path& sandbox_dir) {
  const fs::path file = sandbox_dir / bug.buggy_file;
  const std::string original = read_file(file);
  write_file(file, splice_region(original, bug.buggy_region, patch.replacement_text));
}

CompileResult compile(const BugSpec& bug, const fs::path& sandbox_dir) {
  CompileResult result;
  if (bug.build_command.command.empty()) {
    result.compiled = true;
    return result;
  }
  auto p = run_shell(bug.build_command.command, sandbox_dir, to_ms(bug.build_command.timeout_s));
  result.compiled = p.succeeded();
  result.timed_out = p.timed_out;
  result.output = tail(scrub(std::move(p.output), sandbox_dir), kFailureTextLimit);
  result.wall_time_ms = p.wall_time_ms;
  return result;
}

ValidationResult run_tests(const BugSpec& bug, const fs::path& sandbox_dir) {
  ValidationResult result;
  result.compiled = true;
  for (const auto& test : bug.test_cases) {
    const std::string command = substitute_test(bug.test_command.command, test.invocation);
    auto p = run_shell(command, sandbox_dir, to_ms(bug.test_command.timeout_s));
    TestStatus status = TestStatus::pass;
    if (p.timed_out) {
      status = TestStatus::timeout;
    } else if (p.term_signal != 0) {
      status = TestStatus::error;
    } else if (p.exit_code != 0) {
      status = TestStatus::fail;
    }
    result.outcomes[test.test_id] = status;
    result.test_wall_time_ms[test.test_id] = p.wall_time_ms;
    result.wall_time_ms += p.wall_time_ms;
    if (status != TestStatus::pass) {
      std::string text = tail(scrub(std::move(p.output), sandbox_dir), kFailureTextLimit);
      if (status == TestStatus::timeout) {
        text += "\n[timed out after " + std::to_string(bug.test_command.timeout_s) + " s]";
        text = tail(std::move(text), kFailureTextLimit);
      }
      result.failure_text[test.test_id] = std::move(text);
    }
  }
  return result;
}

ValidationResult WorkspaceValidator::validate(const BugSpec& bug, const Patch& patch) {
  Sandbox sandbox = Sandbox::create(bug.workspace_root, sandbox_parent_);
  apply_patch(bug, patch, sandbox.dir());
  const CompileResult build = compile(bug, sandbox.dir());
  if (!build.compiled) {
    ValidationResult result;
    result.compiled = false;
    result.compile_timed_out = build.timed_out;
    result.build_output = build.output;
    result.wall_time_ms = build.wall_time_ms;
    return result;
  }
  ValidationResult result = run_tests(bug, sandbox.dir());
  result.build_output = build.output;
  result.wall_time_ms += build.wall_time_ms;
  return result;
}

}  // namespace mcts_repair
