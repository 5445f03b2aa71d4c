#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "mcts_repair/core.hpp"

namespace mcts_repair {

struct ProcessResult {
  int exit_code = -1;   // valid when the process exited normally
  int term_signal = 0;  // non-zero when killed by a signal (other than our timeout)
  bool timed_out = false;
  std::string output;  // merged stdout+stderr, tail-truncated to the capture limit
  bool truncated = false;
  std::int64_t wall_time_ms = 0;

  bool succeeded() const { return !timed_out && term_signal == 0 && exit_code == 0; }
};

/// Runs `command` through /bin/sh in `cwd` in its own process group. On
/// timeout the whole group is killed. Throws IoFailure when the process
/// cannot be spawned.
ProcessResult run_shell(const std::string& command, const fs::path& cwd,
                        std::chrono::milliseconds timeout, std::size_t capture_limit = 64 * 1024);

}  // namespace mcts_repair
