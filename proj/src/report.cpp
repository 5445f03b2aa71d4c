#include "mcts_repair/report.hpp"

#include <algorithm>
#include <cstdio>

#include "mcts_repair/llm_client.hpp"

namespace mcts_repair {

bool RepairReport::has_exact_match() const {
  for (const auto& p : plausible_patches) {
    if (p.exact_match) return true;
  }
  return false;
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::budget: return "budget";
    case StopReason::exhausted: return "exhausted";
    case StopReason::early_stop: return "early_stop";
    case StopReason::aborted: return "aborted";
  }
  return "?";
}

ReportSummary summarize(const std::vector<RepairReport>& reports, std::optional<double> price_override) {
  ReportSummary s;
  s.bugs = static_cast<int>(reports.size());
  if (price_override) {
    s.price_per_1k_tokens = *price_override;
  } else if (!reports.empty()) {
    s.price_per_1k_tokens = reports.front().tree_snapshot.config.price_per_1k_tokens;
  } else {
    s.price_per_1k_tokens = SearchConfig{}.price_per_1k_tokens;
  }
  if (reports.empty()) return s;

  double patches = 0, tokens = 0, time_ms = 0, money = 0;
  for (const auto& r : reports) {
    s.plausible_fixes += !r.plausible_patches.empty();
    s.exact_matches += r.has_exact_match();
    s.aborted += r.aborted();
    patches += r.total_patches_generated;
    tokens += static_cast<double>(r.tokens_total);
    time_ms += static_cast<double>(r.wall_time_ms);
    money += price_override ? cost(r.tokens_total, *price_override) : r.estimated_cost;
  }
  const double n = s.bugs;
  s.mean_patches_per_bug = patches / n;
  s.mean_tokens_per_bug = tokens / n;
  s.mean_time_ms_per_bug = time_ms / n;
  s.mean_cost_per_bug = money / n;
  return s;
}

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string row(std::string_view label, const std::string& value) {
  std::string out(label);
  out.resize(std::max<std::size_t>(out.size(), 16), ' ');
  return out + value + "\n";
}

}  // namespace

std::string format_summary_table(const ReportSummary& s) {
  std::string out;
  out += row("Bugs", std::to_string(s.bugs));
  if (s.bugs == 0) return out;
  out += row("PF", std::to_string(s.plausible_fixes));
  out += row("EM", std::to_string(s.exact_matches));
  out += row("Aborted", std::to_string(s.aborted));
  out += row("Patch/Bug", fmt("%.2f", s.mean_patches_per_bug));
  out += row("Token/Bug", fmt("%.0f", s.mean_tokens_per_bug));
  out += row("Time/Bug (s)", fmt("%.2f", s.mean_time_ms_per_bug / 1000.0));
  out += row("Money/Bug ($)", fmt("%.4f", s.mean_cost_per_bug));
  out += row("Price/1k", fmt("%.4f", s.price_per_1k_tokens));
  return out;
}

std::string format_report_summary(const RepairReport& r) {
  std::string out = "bug " + r.bug_id + ": ";
  out += std::to_string(r.plausible_patches.size()) + " plausible patch(es) from " +
         std::to_string(r.total_patches_generated) + " candidates in " + std::to_string(r.iterations) +
         " iterations, stop=" + std::string(to_string(r.stop_reason)) + "\n";
  if (r.aborted()) out += "  aborted: " + r.abort_reason + "\n";
  out += "  tokens " + std::to_string(r.tokens_total) + " (prompt " + std::to_string(r.prompt_tokens) +
         ", completion " + std::to_string(r.completion_tokens) + "), cost $" +
         fmt("%.4f", r.estimated_cost) + "\n";
  for (const auto& p : r.plausible_patches) {
    out += "  node " + std::to_string(p.node_id) + (p.exact_match ? " [exact match]" : "") + "\n";
    std::size_t pos = 0;
    while (pos <= p.replacement_text.size()) {
      auto nl = p.replacement_text.find('\n', pos);
      if (nl == std::string::npos) nl = p.replacement_text.size();
      out += "    | " + p.replacement_text.substr(pos, nl - pos) + "\n";
      pos = nl + 1;
    }
  }
  return out;
}

}  // namespace mcts_repair
