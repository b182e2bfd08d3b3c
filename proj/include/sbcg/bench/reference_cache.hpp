#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>

#include "sbcg/io.hpp"
#include "sbcg/problem.hpp"

namespace sbcg::bench {

/// Reference values on disk, keyed by a hash of the data, the build settings
/// and the requested tolerances. The file is rewritten whole, sorted by key.
class ReferenceCache {
 public:
  explicit ReferenceCache(std::filesystem::path path) : path_(std::move(path)) { load(); }

  const std::filesystem::path& path() const { return path_; }

  /// Cached values for `key`, or `compute()` stored under it. `hit` reports which.
  ReferenceValues get_or_compute(const std::string& key, const std::function<ReferenceValues()>& compute,
                                 bool* hit = nullptr) {
    if (auto it = entries_.find(key); it != entries_.end()) {
      if (hit) *hit = true;
      return it->second;
    }
    if (hit) *hit = false;
    ReferenceValues r = compute();
    entries_[key] = r;
    save();
    return r;
  }

  bool contains(const std::string& key) const { return entries_.count(key) > 0; }

 private:
  void load() {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    std::getline(in, line);  // header
    long line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto f = split_fields(line);
      ReferenceValues r;
      if (f.size() != 5 || !parse_double(f[1], r.g_star) || !parse_double(f[2], r.tolerance) ||
          !parse_double(f[3], r.f_star) || !parse_double(f[4], r.f_tolerance)) {
        throw IngestionError("malformed reference cache " + path_.string(), line_no, 0);
      }
      entries_[std::string(f[0])] = r;
    }
  }

  void save() const {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    const auto tmp = path_.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw Error("cannot write " + tmp);
      out << "key,g_star,g_tolerance,f_star,f_tolerance\n";
      for (const auto& [k, r] : entries_) {
        out << k << ',' << format_double(r.g_star) << ',' << format_double(r.tolerance) << ','
            << format_double(r.f_star) << ',' << format_double(r.f_tolerance) << '\n';
      }
    }
    std::filesystem::rename(tmp, path_);
  }

  std::filesystem::path path_;
  std::map<std::string, ReferenceValues> entries_;
};

}  // namespace sbcg::bench
