#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sbcg/types.hpp"

namespace sbcg {

/// Shortest round-trip decimal form; independent of the C locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s == "nan") {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  if (s == "inf" || s == "-inf") {
    out = s[0] == '-' ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    return true;
  }
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

struct NumericTable {
  std::vector<std::string> header;  // empty when the file had none
  Matrix data;
};

/// Dense comma-separated numbers. A first row containing any non-numeric cell
/// is taken as a header. Rows and columns in errors are 1-based file lines and
/// fields.
inline NumericTable read_numeric_csv(std::istream& in) {
  NumericTable t;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> vals(fields.size());
    std::size_t bad = fields.size();
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (!parse_double(fields[j], vals[j])) {
        bad = j;
        break;
      }
    }
    if (bad < fields.size()) {
      if (rows.empty() && t.header.empty()) {
        for (auto f : fields) t.header.emplace_back(f);
        width = fields.size();
        continue;
      }
      throw IngestionError("non-numeric cell", static_cast<long>(line_no), static_cast<long>(bad + 1));
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw IngestionError("row has " + std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(width),
                           static_cast<long>(line_no), static_cast<long>(std::min(fields.size(), width) + 1));
    }
    rows.push_back(std::move(vals));
  }
  t.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) t.data(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return t;
}

inline NumericTable read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path, 0, 0);
  return read_numeric_csv(in);
}

inline void write_numeric_csv(std::ostream& out, const Matrix& m,
                              const std::vector<std::string>& header = {}) {
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

inline void write_numeric_csv(const std::string& path, const Matrix& m,
                              const std::vector<std::string>& header = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_numeric_csv(out, m, header);
  if (!out) throw Error("failed writing " + path);
}

/// 64-bit FNV-1a, used for content hashes and cache keys.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t hash_matrix(const Matrix& m, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const std::string dims = std::to_string(m.rows()) + "x" + std::to_string(m.cols());
  h = fnv1a(dims, h);
  return fnv1a(std::string_view(reinterpret_cast<const char*>(m.data()),
                                static_cast<std::size_t>(m.size()) * sizeof(double)),
               h);
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[v & 0xF];
    v >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

}  // namespace sbcg
