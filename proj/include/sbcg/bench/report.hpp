#pragma once

#include <algorithm>
#include <cstdio>
#include <limits>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sbcg/bench/aggregate.hpp"
#include "sbcg/bench/config.hpp"
#include "sbcg/bench/svg.hpp"

namespace sbcg::bench {

enum class CheckState { kPass, kFail, kSkip };

struct Check {
  std::string name;
  CheckState state = CheckState::kSkip;
  std::string detail;
};

inline const char* to_string(CheckState s) {
  return s == CheckState::kPass ? "PASS" : s == CheckState::kFail ? "FAIL" : "SKIP";
}

class FinalTable {
 public:
  explicit FinalTable(std::vector<FinalRow> rows) : rows_(std::move(rows)) {}

  const std::vector<FinalRow>& rows() const { return rows_; }

  std::optional<FinalRow> find(const std::string& name) const {
    for (const auto& r : rows_)
      if (r.algorithm == name && r.aggregated) return r;
    return std::nullopt;
  }

  /// Median final value of a metric, if the algorithm was aggregated.
  std::optional<double> final_median(const std::string& name, const std::string& metric) const {
    auto r = find(name);
    if (!r) return std::nullopt;
    return r->final_bands[metric_index(metric)].median;
  }

  std::optional<double> initial_median(const std::string& name, const std::string& metric) const {
    auto r = find(name);
    if (!r) return std::nullopt;
    return r->initial_median[metric_index(metric)];
  }

 private:
  std::vector<FinalRow> rows_;
};

namespace detail {

inline std::string num(double v) { return short_number(v); }

inline Check skipped(std::string name, const std::string& missing) {
  return {std::move(name), CheckState::kSkip, "no aggregate for " + missing};
}

}  // namespace detail

/// Lower-level gap ordering and test-error agreement on regression.
inline std::vector<Check> regression_checks(const FinalTable& t) {
  std::vector<Check> out;
  const auto gf = t.final_median("SBCGF", "g_gap"), gi = t.final_median("SBCGI", "g_gap"),
             ga = t.final_median("aR-IP-SeG", "g_gap"), gd = t.final_median("DBGD-sto", "g_gap");
  const std::string c1 = "g_gap: SBCGF < SBCGI < {aR-IP-SeG, DBGD-sto}";
  if (!gf || !gi || !ga || !gd) {
    out.push_back(detail::skipped(c1, "one of the four methods"));
  } else {
    const bool ok = *gf < *gi && *gi < *ga && *gi < *gd;
    out.push_back({c1, ok ? CheckState::kPass : CheckState::kFail,
                   "SBCGF " + detail::num(*gf) + ", SBCGI " + detail::num(*gi) + ", aR-IP-SeG " +
                       detail::num(*ga) + ", DBGD-sto " + detail::num(*gd)});
  }
  const auto ef = t.final_median("SBCGF", "task_metric"), ei = t.final_median("SBCGI", "task_metric"),
             ea = t.final_median("aR-IP-SeG", "task_metric"), ed = t.final_median("DBGD-sto", "task_metric");
  const std::string c2 = "test error: SBCGF, SBCGI, DBGD-sto within 5% of one another";
  const std::string c3 = "test error: SBCGF, SBCGI, DBGD-sto below aR-IP-SeG";
  if (!ef || !ei || !ed) {
    out.push_back(detail::skipped(c2, "SBCGF, SBCGI or DBGD-sto"));
  } else {
    const double lo = std::min({*ef, *ei, *ed}), hi = std::max({*ef, *ei, *ed});
    out.push_back({c2, hi <= 1.05 * lo ? CheckState::kPass : CheckState::kFail,
                   "SBCGF " + detail::num(*ef) + ", SBCGI " + detail::num(*ei) + ", DBGD-sto " + detail::num(*ed) +
                       " (spread " + detail::num(lo > 0 ? hi / lo : std::numeric_limits<double>::infinity()) + "x)"});
  }
  if (!ef || !ei || !ed || !ea) {
    out.push_back(detail::skipped(c3, "one of the four methods"));
  } else {
    const bool ok = std::max({*ef, *ei, *ed}) < *ea;
    out.push_back({c3, ok ? CheckState::kPass : CheckState::kFail, "aR-IP-SeG " + detail::num(*ea)});
  }
  return out;
}

/// Lower-level gap and recovery orderings on dictionary learning.
inline std::vector<Check> dictionary_checks(const FinalTable& t) {
  std::vector<Check> out;
  const std::string c1 = "g_gap: SBCGF below SBCGI, aR-IP-SeG, DBGD-sto";
  const auto gf = t.final_median("SBCGF", "g_gap");
  if (!gf) {
    out.push_back(detail::skipped(c1, "SBCGF"));
  } else {
    std::string detail_text;
    bool ok = true;
    for (const char* name : {"SBCGF", "SBCGI", "aR-IP-SeG", "DBGD-sto"}) {
      const auto g = t.final_median(name, "g_gap");
      if (!g) continue;
      detail_text += (detail_text.empty() ? "" : ", ") + std::string(name) + " " + detail::num(*g);
      if (std::string(name) != "SBCGF" && !(*gf < *g)) ok = false;
    }
    out.push_back({c1, ok ? CheckState::kPass : CheckState::kFail, detail_text});
  }
  const std::vector<std::string> main{"SBCGI", "SBCGF", "DBGD-sto"};
  const auto ra = t.final_median("aR-IP-SeG", "task_metric");
  std::vector<std::pair<std::string, double>> rec;
  for (const auto& n : main)
    if (auto v = t.final_median(n, "task_metric")) rec.emplace_back(n, *v);
  std::string listed;
  for (const auto& [n, v] : rec) listed += (listed.empty() ? "" : ", ") + n + " " + detail::num(v);
  const std::string c2 = "recovery: SBCGI, SBCGF, DBGD-sto >= aR-IP-SeG";
  if (rec.size() != main.size() || !ra) {
    out.push_back(detail::skipped(c2, "one of the four methods"));
  } else {
    bool ok = true;
    for (const auto& [n, v] : rec) ok = ok && v >= *ra;
    out.push_back({c2, ok ? CheckState::kPass : CheckState::kFail, listed + "; aR-IP-SeG " + detail::num(*ra)});
  }
  const std::string c3 = "recovery: SBCGI, SBCGF, DBGD-sto >= initial";
  const auto r0 = t.initial_median("SBCGI", "task_metric");
  if (rec.size() != main.size() || !r0) {
    out.push_back(detail::skipped(c3, "SBCGI, SBCGF or DBGD-sto"));
  } else {
    bool ok = true;
    for (const auto& [n, v] : rec) ok = ok && v >= *r0;
    out.push_back({c3, ok ? CheckState::kPass : CheckState::kFail, listed + "; initial " + detail::num(*r0)});
  }
  return out;
}

/// Final-gap table and ordering checks for an output directory written by
/// compare. Throws IngestionError when runs exist but aggregates do not.
inline std::string report_text(const fs::path& root) {
  const bool has_final = fs::exists(root / "final.csv");
  if (!has_final) {
    if (!fs::exists(root / "runs")) return "no runs in " + root.string() + "\n";
    throw IngestionError("missing aggregate files in " + root.string() + " (run compare)", 0, 0);
  }
  if (!fs::exists(root / "aggregate.csv")) throw IngestionError("missing aggregate.csv in " + root.string(), 0, 0);
  const FinalTable table(parse_final_csv(read_text_file(root / "final.csv")));
  ProblemKind kind = ProblemKind::kRegression;
  if (fs::exists(root / "config.ini")) kind = parse_config(read_text_file(root / "config.ini")).problem.kind;

  std::ostringstream o;
  o << "problem: " << to_string(kind) << "\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %5s %6s %12s %12s %12s %12s %12s\n", "algorithm", "runs", "failed",
                "queries", "g_gap", "f_gap", "task_metric", "fallbacks");
  o << line;
  for (const auto& r : table.rows()) {
    if (!r.aggregated) {
      std::snprintf(line, sizeof(line), "%-10s %5d %6d %12s\n", r.algorithm.c_str(), r.runs, r.failed,
                    "not aggregated");
      o << line;
      continue;
    }
    std::snprintf(line, sizeof(line), "%-10s %5d %6d %12s %12s %12s %12s %12s\n", r.algorithm.c_str(), r.runs,
                  r.failed, detail::num(r.queries_median).c_str(),
                  detail::num(r.final_bands[metric_index("g_gap")].median).c_str(),
                  detail::num(r.final_bands[metric_index("f_gap")].median).c_str(),
                  detail::num(r.final_bands[metric_index("task_metric")].median).c_str(),
                  detail::num(r.final_bands[metric_index("fallbacks")].median).c_str());
    o << line;
  }
  const auto checks = kind == ProblemKind::kRegression ? regression_checks(table) : dictionary_checks(table);
  for (const auto& c : checks) o << to_string(c.state) << "  " << c.name << "  (" << c.detail << ")\n";
  return o.str();
}

}  // namespace sbcg::bench
