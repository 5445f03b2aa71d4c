#include "mcts_repair/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "mcts_repair/engine.hpp"
#include "mcts_repair/serialization.hpp"
#include "mcts_repair/validation.hpp"

namespace mcts_repair {

ScriptedBackend CorpusEntry::backend() const { return ScriptedBackend::from_json(fixture); }

namespace {

json read_entry_json(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw MalformedEntry(path.string() + ": file is missing");
  try {
    return read_json_file(path);
  } catch (const json::exception& e) {
    // parse_error messages carry the line and column.
    throw MalformedEntry(path.string() + ": " + e.what());
  } catch (const IoFailure& e) {
    throw MalformedEntry(path.string() + ": " + e.what());
  }
}

ExpectedOutcome parse_expected(const fs::path& path) {
  const json j = read_entry_json(path);
  ExpectedOutcome e;
  try {
    e.budget = j.value("budget", e.budget);
    e.plausible = j.at("plausible").get<bool>();
    e.exact_match = j.value("exact_match", false);
  } catch (const json::exception& ex) {
    throw MalformedEntry(path.string() + ": " + ex.what());
  }
  if (e.budget < 0) throw MalformedEntry(path.string() + ": budget must be >= 0");
  if (e.exact_match && !e.plausible) {
    throw MalformedEntry(path.string() + ": exact_match requires plausible");
  }
  return e;
}

}  // namespace

CorpusEntry load_corpus_entry(const fs::path& entry_dir, bool check_root) {
  CorpusEntry entry;
  entry.dir = entry_dir;
  entry.name = entry_dir.filename().string();

  const fs::path spec_path = entry_dir / "bugspec.json";
  const json spec_json = read_entry_json(spec_path);
  if (!spec_json.contains("test_command")) {
    throw MalformedEntry(spec_path.string() + ": missing required key 'test_command'");
  }
  try {
    entry.bug = load_bug_spec(spec_path);
    entry.bug.validate_workspace();
  } catch (const Error& e) {
    throw MalformedEntry(spec_path.string() + ": " + e.what());
  }

  const fs::path fixture_path = entry_dir / "fixture.json";
  entry.fixture = read_entry_json(fixture_path);
  try {
    (void)ScriptedBackend::from_json(entry.fixture);
  } catch (const std::exception& e) {
    throw MalformedEntry(fixture_path.string() + ": " + e.what());
  }
  entry.expected = parse_expected(entry_dir / "expected.json");

  if (check_root) {
    WorkspaceValidator validator;
    const ValidationResult root = validator.validate(entry.bug, Patch::root_of(entry.bug));
    if (root.plausible()) {
      throw MalformedEntry(spec_path.string() + ": the unmodified program already passes every test");
    }
  }
  return entry;
}

std::vector<CorpusEntry> load_corpus(const fs::path& dir, bool check_root) {
  if (!fs::is_directory(dir)) throw MalformedEntry(dir.string() + ": corpus directory not found");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && fs::exists(e.path() / "bugspec.json")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<CorpusEntry> entries;
  entries.reserve(dirs.size());
  for (const auto& d : dirs) entries.push_back(load_corpus_entry(d, check_root));
  return entries;
}

std::vector<RepairReport> run_corpus(const std::vector<CorpusEntry>& entries, const SearchConfig& config,
                                     int parallel) {
  std::vector<RepairReport> reports(entries.size());
  std::vector<std::exception_ptr> errors(entries.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      try {
        ScriptedBackend backend = entries[i].backend();
        reports[i] = repair(entries[i].bug, backend, config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const auto workers = static_cast<std::size_t>(std::max(1, parallel));
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < std::min(workers, entries.size()); ++w) pool.emplace_back(worker);
  worker();
  pool.clear();

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

}  // namespace mcts_repair
