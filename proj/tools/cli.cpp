#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "mcts_repair/backend.hpp"
#include "mcts_repair/engine.hpp"
#include "mcts_repair/llm_client.hpp"
#include "mcts_repair/serialization.hpp"
#include "mcts_repair/tree_check.hpp"

namespace mcts_repair::cli {

namespace {

struct RepairArgs {
  std::vector<std::string> bugs;
  std::string config;
  std::string backend = "live";
  std::optional<int> budget;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int parallel = 1;
};

struct ReportArgs {
  std::vector<std::string> files;
  std::optional<double> price;
  std::string json_out;
};

struct TreeArgs {
  std::string snapshot;
  bool dot = false;
  bool verify = false;
};

std::string file_stem_for(const std::string& bug_id) {
  std::string s = bug_id;
  std::replace_if(s.begin(), s.end(), [](char c) { return c == '/' || c == '\\' || c == ':'; }, '_');
  return s;
}

std::unique_ptr<ModelBackend> make_backend(const std::string& spec, const fs::path& config_path) {
  constexpr std::string_view kScripted = "scripted:";
  if (spec.rfind(kScripted, 0) == 0) {
    return std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(spec.substr(kScripted.size())));
  }
  if (spec != "live") throw InvalidConfig("unknown backend '" + spec + "' (expected live or scripted:<fixture>)");

  ClientOptions defaults;
  std::string base_url = defaults.base_url;
  std::string model = defaults.model;
  if (!config_path.empty()) {
    const json j = read_json_file(config_path);
    base_url = j.value("base_url", base_url);
    model = j.value("model", model);
  }
  return std::make_unique<LiveBackend>(ChatClient::from_environment(base_url, model));
}

int cmd_repair(const RepairArgs& args, std::ostream& out, std::ostream& err) {
  SearchConfig config;
  std::vector<BugSpec> bugs;
  std::unique_ptr<ModelBackend> backend;
  try {
    if (!args.config.empty()) config = load_search_config(args.config);
    if (args.budget) config.patch_budget = *args.budget;
    if (args.seed) config.rng_seed = *args.seed;
    config.validate();
    for (const auto& path : args.bugs) {
      BugSpec bug = load_bug_spec(path);
      bug.validate_workspace();
      bugs.push_back(std::move(bug));
    }
    backend = make_backend(args.backend, args.config);
    fs::create_directories(args.out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }

  std::vector<std::optional<RepairReport>> reports(bugs.size());
  std::vector<std::string> failures(bugs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < bugs.size(); i = next++) {
      try {
        reports[i] = repair(bugs[i], *backend, config);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, args.parallel)), bugs.size());
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  int status = kOk;
  for (std::size_t i = 0; i < bugs.size(); ++i) {
    if (!reports[i]) {
      err << "error: bug " << bugs[i].bug_id << ": " << failures[i] << "\n";
      status = std::max<int>(status, kBadInput);
      continue;
    }
    const RepairReport& r = *reports[i];
    const fs::path base = fs::path(args.out) / file_stem_for(r.bug_id);
    try {
      write_json_file(base.string() + ".report.json", json(r));
      write_json_file(base.string() + ".tree.json", json(r.tree_snapshot));
      write_file(base.string() + ".summary.txt", format_report_summary(r));
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      status = std::max<int>(status, kBadInput);
      continue;
    }
    out << format_report_summary(r);
    if (r.aborted()) {
      err << "backend failure on " << r.bug_id << ": " << r.abort_reason << "\n";
      status = std::max<int>(status, kBackendFailure);
    }
  }
  return status;
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<RepairReport> reports;
  try {
    for (const auto& f : args.files) reports.push_back(load_report(f));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }
  const ReportSummary summary = summarize(reports, args.price);
  out << format_summary_table(summary);
  if (!args.json_out.empty()) {
    try {
      if (args.json_out == "-") {
        out << json(summary).dump(2) << "\n";
      } else {
        write_json_file(args.json_out, json(summary));
      }
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kBadInput;
    }
  }
  return kOk;
}

int cmd_tree(const TreeArgs& args, std::ostream& out, std::ostream& err) {
  if (!fs::is_regular_file(args.snapshot)) {
    err << "error: snapshot not found: " << args.snapshot << "\n";
    return kBadInput;
  }
  TreeSnapshot snapshot;
  try {
    snapshot = load_tree_snapshot(args.snapshot);
  } catch (const MalformedTree& e) {
    err << "violation: " << e.what() << "\n";
    return kViolations;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }

  if (args.dot) out << to_dot(snapshot.tree);
  if (args.verify) {
    const auto issues = verify_snapshot(snapshot);
    for (const auto& issue : issues) err << "violation: " << to_string(issue) << "\n";
    if (!issues.empty()) return kViolations;
    out << "ok: " << snapshot.tree.size() << " nodes, invariants and replay hold\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tree-search program repair driven by a language model"};
  app.name(args.empty() ? "mcts-repair" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  RepairArgs repair_args;
  auto* repair = app.add_subcommand("repair", "Search for patches for one or more bugs");
  repair->add_option("--bug", repair_args.bugs, "Bug spec JSON (repeatable)")->required();
  repair->add_option("--config", repair_args.config, "Search config JSON");
  repair->add_option("--backend", repair_args.backend, "live or scripted:<fixture.json>");
  repair->add_option("--budget", repair_args.budget, "Patch budget (overrides the config)")
      ->check(CLI::NonNegativeNumber);
  repair->add_option("--seed", repair_args.seed, "Sampling seed passed to the backend");
  repair->add_option("--out", repair_args.out, "Output directory")->capture_default_str();
  repair->add_option("--parallel", repair_args.parallel, "Bugs repaired concurrently")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Aggregate repair reports into a cost table");
  report->add_option("files", report_args.files, "Report JSON files");
  report->add_option("--price", report_args.price, "Price per 1k tokens (overrides the reports)")
      ->check(CLI::NonNegativeNumber);
  report->add_option("--json", report_args.json_out, "Also write the summary as JSON ('-' for stdout)");

  TreeArgs tree_args;
  auto* tree = app.add_subcommand("tree", "Inspect a tree snapshot");
  tree->add_option("snapshot", tree_args.snapshot, "Tree snapshot or report JSON")->required();
  auto* dot = tree->add_flag("--dot", tree_args.dot, "Print a Graphviz description");
  auto* verify = tree->add_flag("--verify", tree_args.verify, "Check invariants and replay consistency");
  dot->excludes(verify);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("mcts-repair");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }

  if (*repair) return cmd_repair(repair_args, out, err);
  if (*report) return cmd_report(report_args, out, err);
  if (!tree_args.dot && !tree_args.verify) {
    err << "tree: one of --dot or --verify is required\n";
    return kBadInput;
  }
  return cmd_tree(tree_args, out, err);
}

}  // namespace mcts_repair::cli
