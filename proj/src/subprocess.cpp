#include "mcts_repair/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

namespace mcts_repair {

namespace {

using Clock = std::chrono::steady_clock;

void append_tail(std::string& out, const char* data, std::size_t n, std::size_t limit, bool& truncated) {
  out.append(data, n);
  // Trim in batches so long outputs are not re-copied on every read.
  if (out.size() > 2 * limit) {
    out.erase(0, out.size() - limit);
    truncated = true;
  }
}

// Non-blocking drain; returns true on EOF.
bool drain(int fd, std::string& out, std::size_t limit, bool& truncated) {
  char buf[8192];
  while (true) {
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n > 0) {
      append_tail(out, buf, static_cast<std::size_t>(n), limit, truncated);
      continue;
    }
    if (n == 0) return true;
    if (errno == EINTR) continue;
    return false;  // EAGAIN
  }
}

}  // namespace

ProcessResult run_shell(const std::string& command, const fs::path& cwd,
                        std::chrono::milliseconds timeout, std::size_t capture_limit) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw IoFailure(std::string("pipe: ") + std::strerror(errno));

  const std::string dir = cwd.string();
  const auto started = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw IoFailure(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    if (::chdir(dir.c_str()) != 0) ::_exit(126);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::dup2(fds[1], STDERR_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(fds[1]);
  const int fd = fds[0];
  ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);

  ProcessResult result;
  const auto deadline = started + timeout;
  bool eof = false;
  bool exited = false;
  int status = 0;

  while (true) {
    if (!eof) {
      const auto remaining =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
      pollfd p{fd, POLLIN, 0};
      const int slice = static_cast<int>(std::clamp<long long>(remaining, 0, 50));
      if (::poll(&p, 1, slice) > 0) eof = drain(fd, result.output, capture_limit, result.truncated);
    }
    if (!exited) {
      const pid_t r = ::waitpid(pid, &status, WNOHANG);
      if (r == pid) exited = true;
      if (!exited && eof) ::poll(nullptr, 0, 5);
    }
    if (exited) {
      // Anything still holding the pipe is a stray grandchild.
      if (!eof) drain(fd, result.output, capture_limit, result.truncated);
      ::kill(-pid, SIGKILL);
      break;
    }
    if (Clock::now() >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      drain(fd, result.output, capture_limit, result.truncated);
      break;
    }
  }
  ::close(fd);

  result.wall_time_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();
  if (!result.timed_out) {
    if (WIFEXITED(status)) {
      result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      result.term_signal = WTERMSIG(status);
    }
  }
  if (result.output.size() > capture_limit) {
    result.output.erase(0, result.output.size() - capture_limit);
    result.truncated = true;
  }
  return result;
}

}  // namespace mcts_repair
