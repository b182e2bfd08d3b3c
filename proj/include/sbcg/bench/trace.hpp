#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sbcg/io.hpp"
#include "sbcg/solvers.hpp"

namespace sbcg::bench {

inline constexpr const char* kTraceHeader = "iter,queries,wall_ms,g_gap,f_gap,fw_gap,task_metric,fallbacks";

inline void write_trace_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) {
    out << r.iteration << ',' << r.oracle_queries << ',' << format_double(r.wall_ms) << ','
        << format_double(r.g_gap) << ',' << format_double(r.f_gap) << ',' << format_double(r.fw_gap) << ','
        << format_double(r.task_metric) << ',' << r.cut_fallback_count << '\n';
  }
}

inline std::string trace_csv(const std::vector<MetricsRecord>& records) {
  std::ostringstream o;
  write_trace_csv(o, records);
  return o.str();
}

inline std::vector<MetricsRecord> read_trace_csv(std::istream& in) {
  std::vector<MetricsRecord> out;
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw IngestionError("trace header mismatch", 1, 0);
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 8) throw IngestionError("trace row needs 8 fields", line_no, 0);
    double v[8];
    for (std::size_t j = 0; j < 8; ++j) {
      if (!parse_double(f[j], v[j])) throw IngestionError("bad number in trace", line_no, static_cast<long>(j + 1));
    }
    MetricsRecord r;
    r.iteration = static_cast<long>(v[0]);
    r.oracle_queries = static_cast<std::int64_t>(v[1]);
    r.wall_ms = v[2];
    r.g_gap = v[3];
    r.f_gap = v[4];
    r.fw_gap = v[5];
    r.task_metric = v[6];
    r.cut_fallback_count = static_cast<long>(v[7]);
    out.push_back(r);
  }
  return out;
}

inline std::vector<MetricsRecord> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string(), 0, 0);
  return read_trace_csv(in);
}

/// Where one (algorithm, seed) run lives under an output root.
struct RunPaths {
  std::filesystem::path trace, meta, final_iterate;

  static RunPaths under(const std::filesystem::path& root, const std::string& algorithm, std::uint64_t seed) {
    const auto dir = root / "runs" / algorithm;
    const std::string stem = "seed_" + std::to_string(seed);
    return {dir / (stem + ".csv"), dir / (stem + ".meta"), dir / (stem + ".final.csv")};
  }
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string(), 0, 0);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

inline void write_vector_csv(const std::filesystem::path& path, const Vector& x) {
  std::ostringstream o;
  o << "x\n";
  for (Index i = 0; i < x.size(); ++i) o << format_double(x(i)) << '\n';
  write_text_file(path, o.str());
}

inline Vector read_vector_csv(const std::filesystem::path& path) {
  const NumericTable t = read_numeric_csv(path.string());
  if (t.data.cols() != 1) throw IngestionError("iterate file must have one column", 1, 0);
  return t.data.col(0);
}

/// `key = value` lines from a meta file, up to its config echo.
inline std::vector<std::pair<std::string, std::string>> read_meta(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# config", 0) == 0) break;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  return out;
}

}  // namespace sbcg::bench
