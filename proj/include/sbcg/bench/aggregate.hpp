#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sbcg/bench/trace.hpp"

namespace sbcg::bench {

inline constexpr std::array<const char*, 6> kMetricNames{"g_gap", "f_gap", "fw_gap", "task_metric", "wall_ms",
                                                         "fallbacks"};
inline constexpr std::size_t kMetricCount = kMetricNames.size();

inline std::size_t metric_index(const std::string& name) {
  for (std::size_t i = 0; i < kMetricCount; ++i)
    if (name == kMetricNames[i]) return i;
  throw InvalidArgument("unknown metric '" + name + "'");
}

inline double metric_value(const MetricsRecord& r, std::size_t m) {
  switch (m) {
    case 0:
      return r.g_gap;
    case 1:
      return r.f_gap;
    case 2:
      return r.fw_gap;
    case 3:
      return r.task_metric;
    case 4:
      return r.wall_ms;
    default:
      return static_cast<double>(r.cut_fallback_count);
  }
}

struct Band {
  double median = kNaN, min = kNaN, max = kNaN;
};

/// Median (mean of the middle pair for even counts), min and max of the
/// non-NaN values; all NaN when none are left.
inline Band band_of(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  Band b;
  if (v.empty()) return b;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  b.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  b.min = v.front();
  b.max = v.back();
  return b;
}

struct AggregatePoint {
  std::int64_t queries = 0;
  std::array<Band, kMetricCount> bands;
};

using Trace = std::vector<MetricsRecord>;

/// Bands on the union of the runs' query counts, from the first count every
/// run has reached; each run contributes its last record at or before the
/// grid point.
inline std::vector<AggregatePoint> aggregate_traces(const std::vector<const Trace*>& runs) {
  std::vector<AggregatePoint> out;
  if (runs.empty()) return out;
  std::int64_t start = 0;
  std::vector<std::int64_t> grid;
  for (const Trace* t : runs) {
    if (t->empty()) throw InvalidArgument("cannot aggregate an empty trace");
    start = std::max(start, t->front().oracle_queries);
    for (const auto& r : *t) grid.push_back(r.oracle_queries);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.erase(grid.begin(), std::lower_bound(grid.begin(), grid.end(), start));

  std::vector<std::size_t> cursor(runs.size(), 0);
  std::vector<double> vals(runs.size());
  for (std::int64_t q : grid) {
    AggregatePoint p;
    p.queries = q;
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const Trace& t = *runs[k];
      while (cursor[k] + 1 < t.size() && t[cursor[k] + 1].oracle_queries <= q) ++cursor[k];
    }
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      for (std::size_t k = 0; k < runs.size(); ++k) vals[k] = metric_value((*runs[k])[cursor[k]], m);
      p.bands[m] = band_of(vals);
    }
    out.push_back(p);
  }
  return out;
}

/// Outcome of one (algorithm, seed) run as the grid sees it.
struct RunOutcome {
  std::string algorithm;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string status;  // solver status, or "failed" when the run threw
  long iterations = 0;
  std::int64_t queries = 0;
  long fallbacks = 0;
  bool infeasible_cut = false;  // stopped on an empty cut
  std::string message;
  std::string fw_gap_kind = "none";
  Trace records;
  Vector final_x;
};

struct FinalRow {
  std::string algorithm;
  int runs = 0;
  int failed = 0;
  bool aggregated = false;  // at least half the seeds succeeded
  double queries_median = kNaN;
  std::array<Band, kMetricCount> final_bands;
  std::array<double, kMetricCount> initial_median{};
};

struct AlgorithmAggregate {
  FinalRow final;
  std::vector<AggregatePoint> points;
};

/// Per-algorithm aggregation of a finished grid. Runs that threw or stopped
/// with an error count as failed; an algorithm is aggregated only when at
/// least half of its seeds succeeded.
inline std::vector<AlgorithmAggregate> aggregate_outcomes(const std::vector<std::string>& algorithms,
                                                          const std::vector<RunOutcome>& outcomes) {
  std::vector<AlgorithmAggregate> out;
  for (const auto& name : algorithms) {
    AlgorithmAggregate a;
    a.final.algorithm = name;
    std::vector<const Trace*> good;
    std::vector<const RunOutcome*> sorted;
    for (const auto& o : outcomes)
      if (o.algorithm == name) sorted.push_back(&o);
    std::sort(sorted.begin(), sorted.end(), [](auto* x, auto* y) { return x->seed < y->seed; });
    for (const RunOutcome* o : sorted) {
      if (o->ok && !o->records.empty()) {
        good.push_back(&o->records);
      } else {
        ++a.final.failed;
      }
    }
    a.final.runs = static_cast<int>(good.size());
    a.final.aggregated = !good.empty() && 2 * good.size() >= sorted.size();
    if (a.final.aggregated) {
      a.points = aggregate_traces(good);
      std::vector<double> q, last(good.size()), first(good.size());
      for (const Trace* t : good) q.push_back(static_cast<double>(t->back().oracle_queries));
      a.final.queries_median = band_of(q).median;
      for (std::size_t m = 0; m < kMetricCount; ++m) {
        for (std::size_t k = 0; k < good.size(); ++k) {
          last[k] = metric_value(good[k]->back(), m);
          first[k] = metric_value(good[k]->front(), m);
        }
        a.final.final_bands[m] = band_of(last);
        a.final.initial_median[m] = band_of(first).median;
      }
    } else {
      a.final.initial_median.fill(kNaN);
    }
    out.push_back(std::move(a));
  }
  return out;
}

inline std::string aggregate_csv(const std::vector<AlgorithmAggregate>& aggs) {
  std::ostringstream o;
  o << "algorithm,queries";
  for (const char* m : kMetricNames) o << ',' << m << "_median," << m << "_min," << m << "_max";
  o << '\n';
  for (const auto& a : aggs) {
    for (const auto& p : a.points) {
      o << a.final.algorithm << ',' << p.queries;
      for (const Band& b : p.bands)
        o << ',' << format_double(b.median) << ',' << format_double(b.min) << ',' << format_double(b.max);
      o << '\n';
    }
  }
  return o.str();
}

inline std::string final_csv(const std::vector<AlgorithmAggregate>& aggs) {
  std::ostringstream o;
  o << "algorithm,runs,failed,aggregated,queries_median";
  for (const char* m : kMetricNames) o << ',' << m << "_median," << m << "_min," << m << "_max";
  for (const char* m : kMetricNames) o << ",initial_" << m << "_median";
  o << '\n';
  for (const auto& a : aggs) {
    const FinalRow& f = a.final;
    o << f.algorithm << ',' << f.runs << ',' << f.failed << ',' << (f.aggregated ? 1 : 0) << ','
      << format_double(f.queries_median);
    for (const Band& b : f.final_bands)
      o << ',' << format_double(b.median) << ',' << format_double(b.min) << ',' << format_double(b.max);
    for (double v : f.initial_median) o << ',' << format_double(v);
    o << '\n';
  }
  return o.str();
}

inline std::vector<FinalRow> parse_final_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const std::size_t width = 5 + 4 * kMetricCount;
  if (split_fields(line).size() != width) throw IngestionError("final table header has the wrong width", 1, 0);
  std::vector<FinalRow> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != width) throw IngestionError("final table row has the wrong width", line_no, 0);
    std::vector<double> v(width);
    for (std::size_t j = 1; j < width; ++j) {
      if (!parse_double(f[j], v[j])) throw IngestionError("bad number in final table", line_no, static_cast<long>(j + 1));
    }
    FinalRow r;
    r.algorithm = std::string(f[0]);
    r.runs = static_cast<int>(v[1]);
    r.failed = static_cast<int>(v[2]);
    r.aggregated = v[3] != 0.0;
    r.queries_median = v[4];
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      r.final_bands[m] = {v[5 + 3 * m], v[6 + 3 * m], v[7 + 3 * m]};
      r.initial_median[m] = v[5 + 3 * kMetricCount + m];
    }
    rows.push_back(r);
  }
  return rows;
}

/// Aggregate rows grouped by algorithm, in file order.
inline std::map<std::string, std::vector<AggregatePoint>> parse_aggregate_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const std::size_t width = 2 + 3 * kMetricCount;
  if (split_fields(line).size() != width) throw IngestionError("aggregate header has the wrong width", 1, 0);
  std::map<std::string, std::vector<AggregatePoint>> out;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != width) throw IngestionError("aggregate row has the wrong width", line_no, 0);
    AggregatePoint p;
    double q = 0;
    if (!parse_double(f[1], q)) throw IngestionError("bad query count", line_no, 2);
    p.queries = static_cast<std::int64_t>(q);
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      double* dst[3] = {&p.bands[m].median, &p.bands[m].min, &p.bands[m].max};
      for (std::size_t k = 0; k < 3; ++k) {
        if (!parse_double(f[2 + 3 * m + k], *dst[k]))
          throw IngestionError("bad number in aggregate", line_no, static_cast<long>(3 + 3 * m + k));
      }
    }
    out[std::string(f[0])].push_back(p);
  }
  return out;
}

inline std::string sanitize_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

inline std::string runs_csv(const std::vector<RunOutcome>& outcomes) {
  std::vector<const RunOutcome*> sorted;
  for (const auto& o : outcomes) sorted.push_back(&o);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
    return a->algorithm != b->algorithm ? a->algorithm < b->algorithm : a->seed < b->seed;
  });
  std::ostringstream o;
  o << "algorithm,seed,status,iterations,queries,fallbacks,infeasible_cut,message\n";
  for (const RunOutcome* r : sorted) {
    o << r->algorithm << ',' << r->seed << ',' << r->status << ',' << r->iterations << ',' << r->queries << ','
      << r->fallbacks << ',' << (r->infeasible_cut ? 1 : 0) << ',' << sanitize_field(r->message) << '\n';
  }
  return o.str();
}

}  // namespace sbcg::bench
