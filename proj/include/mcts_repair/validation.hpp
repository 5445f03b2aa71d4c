#pragma once

#include <map>
#include <memory>
#include <string>

#include "mcts_repair/core.hpp"

namespace mcts_repair {

/// Captured output kept per failing test.
inline constexpr std::size_t kFailureTextLimit = 8 * 1024;

/// Placeholder substituted for the sandbox path in captured output, so the
/// feedback does not depend on where the sandbox happened to live.
inline constexpr std::string_view kWorkspacePlaceholder = "<workspace>";

struct CompileResult {
  bool compiled = false;
  bool timed_out = false;
  std::string output;
  std::int64_t wall_time_ms = 0;
};

struct ValidationResult {
  bool compiled = false;
  bool compile_timed_out = false;
  std::string build_output;
  std::map<std::string, TestStatus> outcomes;       // empty unless compiled
  std::map<std::string, std::string> failure_text;  // non-passing tests only
  std::map<std::string, std::int64_t> test_wall_time_ms;
  std::int64_t wall_time_ms = 0;

  /// compiled and every test passed (and at least one test ran).
  bool plausible() const;
  int passed() const;
  std::map<std::string, TestOutcome> test_outcomes() const;
};

/// A private copy of a workspace, removed on destruction.
class Sandbox {
 public:
  /// Copies `workspace` into a fresh directory under `parent` (the system
  /// temp dir when empty). Throws IoFailure.
  static Sandbox create(const fs::path& workspace, const fs::path& parent = {});

  Sandbox(Sandbox&& other) noexcept;
  Sandbox& operator=(Sandbox&& other) noexcept;
  Sandbox(const Sandbox&) = delete;
  Sandbox& operator=(const Sandbox&) = delete;
  ~Sandbox();

  const fs::path& dir() const { return dir_; }

 private:
  Sandbox(fs::path root, fs::path dir) : root_(std::move(root)), dir_(std::move(dir)) {}
  fs::path root_;
  fs::path dir_;
};

/// Replaces the buggy region of buggy_file inside sandbox_dir with the
/// patch text; everything else stays byte-identical. Throws
/// RegionOutOfRange or IoFailure.
void apply_patch(const BugSpec& bug, const Patch& patch, const fs::path& sandbox_dir);

/// Splices `replacement` over the 1-based inclusive line range of `content`.
std::string splice_region(std::string_view content, LineRange region, std::string_view replacement);

/// Runs the build command; exit 0 within the timeout means compiled. An
/// empty build command always compiles.
CompileResult compile(const BugSpec& bug, const fs::path& sandbox_dir);

/// Runs every declared test case, substituting the invocation for `{test}`.
ValidationResult run_tests(const BugSpec& bug, const fs::path& sandbox_dir);

/// Apply, compile and test one candidate in isolation.
class Validator {
 public:
  virtual ~Validator() = default;
  virtual ValidationResult validate(const BugSpec& bug, const Patch& patch) = 0;
};

/// Full-copy sandbox per candidate; the original workspace is never written.
class WorkspaceValidator : public Validator {
 public:
  explicit WorkspaceValidator(fs::path sandbox_parent = {}) : sandbox_parent_(std::move(sandbox_parent)) {}
  ValidationResult validate(const BugSpec& bug, const Patch& patch) override;

 private:
  fs::path sandbox_parent_;
};

}  // namespace mcts_repair
