#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "mcts_repair/backend.hpp"
#include "mcts_repair/core.hpp"
#include "mcts_repair/report.hpp"

namespace mcts_repair {

/// What an entry promises under its own fixture.
struct ExpectedOutcome {
  int budget = 16;            // K: candidates allowed for the promised outcome
  bool plausible = false;     // a plausible patch appears within K
  bool exact_match = false;   // one of those plausible patches equals the reference
};

/// One directory of the corpus:
///   <entry>/bugspec.json   BugSpec, workspace_root relative to the entry
///   <entry>/workspace/     the buggy program and its tests
///   <entry>/fixture.json   scripted model output (see ScriptedBackend)
///   <entry>/expected.json  ExpectedOutcome
struct CorpusEntry {
  std::string name;
  fs::path dir;
  BugSpec bug;
  nlohmann::json fixture;
  ExpectedOutcome expected;

  ScriptedBackend backend() const;
};

/// Loads one entry. With check_root, the unmodified program is run and an
/// entry whose tests already pass is rejected. Throws MalformedEntry naming
/// the offending file (and line, for JSON syntax errors).
CorpusEntry load_corpus_entry(const fs::path& entry_dir, bool check_root = true);

/// Every subdirectory holding a bugspec.json, sorted by name.
std::vector<CorpusEntry> load_corpus(const fs::path& dir, bool check_root = true);

/// Runs each entry with its own scripted backend, `parallel` engines at a
/// time. Reports come back in entry order.
std::vector<RepairReport> run_corpus(const std::vector<CorpusEntry>& entries, const SearchConfig& config,
                                     int parallel = 1);

}  // namespace mcts_repair
