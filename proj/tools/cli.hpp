#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcts_repair::cli {

enum ExitCode : int {
  kOk = 0,
  kViolations = 1,      // tree --verify found problems
  kBadInput = 2,        // malformed arguments, specs, configs or reports
  kBackendFailure = 3,  // the model could not be reached
};

/// Entry point shared by the executable and the parity tests. args[0] is
/// the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcts_repair::cli
