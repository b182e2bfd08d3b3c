#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sbcg/bench/runner.hpp"
#include "sbcg/io.hpp"

#include <CLI11.hpp>

namespace sbcg::bench {

enum class ProblemKind { kRegression, kDictionary };

inline const char* to_string(ProblemKind k) { return k == ProblemKind::kRegression ? "regression" : "dictionary"; }

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kRegression;
  std::uint64_t data_seed = 1;
  // regression
  Index rows = 20;
  Index dim = 100;
  double noise = 0.01;
  double lambda = 10.0;
  std::string csv;  // non-empty: load this table instead of generating
  Index target = -1;
  // dictionary
  DictionaryDims dims = DictionaryDims::desk();
  DictionaryBuild build;
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<std::string> algorithms;
  std::vector<std::uint64_t> seeds;
  std::int64_t budget = 900000;
  long log_points = 500;
  bool timing = true;
  SolverConfig warm;
  std::map<std::string, SolverConfig> solver;

  /// Settings for one run: the algorithm's section plus the shared budget,
  /// logging cadence, timing switch and seed.
  SolverConfig solver_for(const std::string& name, std::uint64_t seed) const {
    auto it = solver.find(name);
    if (it == solver.end()) throw ConfigError("no settings for algorithm '" + name + "'");
    SolverConfig c = it->second;
    c.query_budget = budget;
    c.horizon = std::numeric_limits<long>::max();
    c.log_points = log_points;
    c.record_timing = timing;
    c.seed = seed;
    return c;
  }

  void validate() const {
    if (algorithms.empty()) throw ConfigError("at least one algorithm is required");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (budget <= 0) throw ConfigError("query budget must be positive");
    if (log_points < 1) throw ConfigError("log_points must be positive");
    for (const auto& a : algorithms) {
      if (!is_known_algorithm(a)) throw ConfigError("unknown algorithm '" + a + "'");
      try {
        solver_for(a, 0).validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError("[" + a + "] " + e.what());
      }
    }
    try {
      warm.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("[warm_start] ") + e.what());
    }
    if (problem.kind == ProblemKind::kRegression) {
      if (problem.csv.empty() && (problem.rows < 1 || problem.dim < 1)) throw ConfigError("regression sizes must be positive");
      if (problem.noise < 0 || problem.lambda <= 0) {
        throw ConfigError("invalid regression noise or radius");
      }
    } else {
      try {
        problem.dims.validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("[problem] ") + e.what());
      }
    }
  }
};

/// Step sizes, cut slacks and baseline parameters used in the experiments.
inline ExperimentConfig default_config(ProblemKind kind) {
  ExperimentConfig c;
  c.problem.kind = kind;
  c.algorithms = {"SBCGI", "SBCGF", "aR-IP-SeG", "DBGD-sto"};
  for (std::uint64_t s = 0; s < 10; ++s) c.seeds.push_back(s);
  c.warm.warm_start_budget = 100000;
  c.warm.warm_gamma = {0.1, 1.0};

  SolverConfig sbcgi, sbcgf, ar, dbgd;
  if (kind == ProblemKind::kRegression) {
    c.budget = 900000;
    sbcgi.gamma = {0.01, 1.0};
    sbcgf.gamma = {1e-5, 0.0};
    sbcgi.kt = sbcgf.kt = {KtMode::kManual, 1.0, 1e-4, 0.5};
    ar.aripseg = {1e-7, 1e3, 1.0};
    dbgd.dbgd = {1.0, 1.0, 1e-6, 0.0};
  } else {
    c.budget = 300000;
    sbcgi.gamma = {0.1, 2.0 / 3.0};
    sbcgf.gamma = {1e-3, 0.0};
    sbcgi.kt = sbcgf.kt = {KtMode::kManual, 1.0, 0.01, 1.0 / 3.0};
    sbcgi.batch = ar.batch = dbgd.batch = 8;
    ar.aripseg = {1e-4, 1.0, 1.0};
    dbgd.dbgd = {100.0, 100.0, 5e-3, 0.0};
  }
  c.solver["SBCGI"] = c.solver["SBCGI-M"] = c.solver["STORM-FW"] = sbcgi;
  c.solver["SBCGF"] = c.solver["SBCGF-M"] = c.solver["SPIDER-FW"] = sbcgf;
  c.solver["aR-IP-SeG"] = ar;
  c.solver["DBGD-sto"] = dbgd;
  return c;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\"'");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"'");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == '[' || ch == ']') {
      if (auto t = trim(cur); !t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (auto t = trim(cur); !t.empty()) out.push_back(t);
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!parse_double(trim(v), out)) throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

inline std::int64_t to_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::int64_t out = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec == std::errc() && res.ptr == t.data() + t.size()) return out;
  // Accept integral values written in floating-point form (1e5).
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 9e18) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return static_cast<std::int64_t>(d);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

inline std::vector<std::uint64_t> to_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(v)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(static_cast<std::uint64_t>(to_int("seeds", item)));
      continue;
    }
    const auto lo = to_int("seeds", item.substr(0, dots)), hi = to_int("seeds", item.substr(dots + 2));
    if (lo < 0 || hi < lo) throw ConfigError("bad seed range '" + item + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(static_cast<std::uint64_t>(s));
  }
  return out;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

inline const char* kt_mode_name(KtMode m) {
  switch (m) {
    case KtMode::kTheorem:
      return "theorem";
    case KtMode::kManual:
      return "manual";
    case KtMode::kZero:
      return "zero";
  }
  return "theorem";
}

}  // namespace detail

/// One `key = value` pair of an algorithm section.
inline void apply_solver_key(SolverConfig& c, const std::string& key, const std::string& value) {
  using detail::to_double;
  using detail::to_int;
  if (key == "gamma.scale") c.gamma.scale = to_double(key, value);
  else if (key == "gamma.power") c.gamma.power = to_double(key, value);
  else if (key == "kt.mode") {
    const std::string m = detail::trim(value);
    if (m == "theorem") c.kt.mode = KtMode::kTheorem;
    else if (m == "manual") c.kt.mode = KtMode::kManual;
    else if (m == "zero") c.kt.mode = KtMode::kZero;
    else throw ConfigError("kt.mode must be theorem, manual or zero");
  } else if (key == "kt.abs_const") c.kt.abs_const = to_double(key, value);
  else if (key == "kt.kappa") c.kt.kappa = to_double(key, value);
  else if (key == "kt.power") c.kt.power = to_double(key, value);
  else if (key == "batch") c.batch = static_cast<long>(to_int(key, value));
  else if (key == "spider.q") c.spider_q = static_cast<long>(to_int(key, value));
  else if (key == "spider.S") c.spider_S = static_cast<long>(to_int(key, value));
  else if (key == "omega") c.omega = to_double(key, value);
  else if (key == "eps_f") c.eps_f = to_double(key, value);
  else if (key == "eps_g") c.eps_g = to_double(key, value);
  else if (key == "delta") c.delta = to_double(key, value);
  else if (key == "value_batch") c.value_batch = static_cast<long>(to_int(key, value));
  else if (key == "aripseg.gamma0") c.aripseg.gamma0 = to_double(key, value);
  else if (key == "aripseg.rho0") c.aripseg.rho0 = to_double(key, value);
  else if (key == "aripseg.r") c.aripseg.r = to_double(key, value);
  else if (key == "dbgd.alpha") c.dbgd.alpha = to_double(key, value);
  else if (key == "dbgd.beta") c.dbgd.beta = to_double(key, value);
  else if (key == "dbgd.gamma") c.dbgd.gamma = to_double(key, value);
  else if (key == "dbgd.g_lower") c.dbgd.g_lower = to_double(key, value);
  else throw ConfigError("unknown solver key '" + key + "'");
}

/// One `key = value` pair in `[section]`.
inline void apply_key(ExperimentConfig& c, const std::string& section, const std::string& key,
                      const std::string& value) {
  using detail::to_double;
  using detail::to_int;
  const std::string where = section + "." + key;
  if (section == "experiment") {
    if (key == "problem") {
      const std::string p = detail::trim(value);
      if (p == "regression") c.problem.kind = ProblemKind::kRegression;
      else if (p == "dictionary") c.problem.kind = ProblemKind::kDictionary;
      else throw ConfigError("problem must be regression or dictionary");
    } else if (key == "algorithms") c.algorithms = detail::split_list(value);
    else if (key == "seeds") c.seeds = detail::to_seeds(value);
    else if (key == "budget") c.budget = to_int(where, value);
    else if (key == "log_points") c.log_points = static_cast<long>(to_int(where, value));
    else if (key == "timing") c.timing = detail::to_bool(where, value);
    else throw ConfigError("unknown key '" + where + "'");
  } else if (section == "problem") {
    ProblemSpec& p = c.problem;
    DictionaryDims& d = p.dims;
    if (key == "data_seed") p.data_seed = static_cast<std::uint64_t>(to_int(where, value));
    else if (key == "rows") p.rows = to_int(where, value);
    else if (key == "dim") p.dim = to_int(where, value);
    else if (key == "noise") p.noise = d.noise = to_double(where, value);
    else if (key == "lambda") p.lambda = to_double(where, value);
    else if (key == "csv") p.csv = detail::trim(value);
    else if (key == "target") p.target = to_int(where, value);
    else if (key == "full") d = detail::to_bool(where, value) ? DictionaryDims::full() : DictionaryDims::desk();
    else if (key == "m") d.m = to_int(where, value);
    else if (key == "q") d.q = to_int(where, value);
    else if (key == "p") d.p = to_int(where, value);
    else if (key == "p_new") d.p_new = to_int(where, value);
    else if (key == "n") d.n = to_int(where, value);
    else if (key == "n_new") d.n_new = to_int(where, value);
    else if (key == "nnz") d.nnz = to_int(where, value);
    else if (key == "delta") d.delta = to_double(where, value);
    else if (key == "init.phase1") p.build.phase1_iterations = static_cast<long>(to_int(where, value));
    else if (key == "init.phase2") p.build.phase2_iterations = static_cast<long>(to_int(where, value));
    else if (key == "reference.iterations") p.build.cg_bio_iterations = static_cast<long>(to_int(where, value));
    else throw ConfigError("unknown key '" + where + "'");
  } else if (section == "warm_start") {
    if (key == "budget") c.warm.warm_start_budget = to_int(where, value);
    else if (key == "gamma.scale") c.warm.warm_gamma.scale = to_double(where, value);
    else if (key == "gamma.power") c.warm.warm_gamma.power = to_double(where, value);
    else if (key == "eps_g") c.warm.eps_g = to_double(where, value);
    else throw ConfigError("unknown key '" + where + "'");
  } else if (is_known_algorithm(section)) {
    try {
      apply_solver_key(c.solver[section], key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("[" + section + "] " + e.what());
    }
  } else {
    throw ConfigError("unknown section '[" + section + "]'");
  }
}

/// The whole configuration in the file format read by parse_config.
inline std::string to_text(const ExperimentConfig& c) {
  using sbcg::format_double;
  std::ostringstream o;
  o << "[experiment]\n";
  o << "problem = " << to_string(c.problem.kind) << "\n";
  o << "algorithms = " << detail::join(c.algorithms) << "\n";
  std::vector<std::string> seeds;
  for (auto s : c.seeds) seeds.push_back(std::to_string(s));
  o << "seeds = " << detail::join(seeds) << "\n";
  o << "budget = " << c.budget << "\n";
  o << "log_points = " << c.log_points << "\n";
  o << "timing = " << (c.timing ? "true" : "false") << "\n\n";

  const ProblemSpec& p = c.problem;
  o << "[problem]\n";
  o << "data_seed = " << p.data_seed << "\n";
  if (p.kind == ProblemKind::kRegression) {
    if (!p.csv.empty()) {
      o << "csv = " << p.csv << "\n";
      o << "target = " << p.target << "\n";
    } else {
      o << "rows = " << p.rows << "\n";
      o << "dim = " << p.dim << "\n";
      o << "noise = " << format_double(p.noise) << "\n";
    }
    o << "lambda = " << format_double(p.lambda) << "\n\n";
    o << "[warm_start]\n";
    o << "budget = " << c.warm.warm_start_budget << "\n";
    o << "gamma.scale = " << format_double(c.warm.warm_gamma.scale) << "\n";
    o << "gamma.power = " << format_double(c.warm.warm_gamma.power) << "\n";
    o << "eps_g = " << format_double(c.warm.eps_g) << "\n\n";
  } else {
    const DictionaryDims& d = p.dims;
    o << "m = " << d.m << "\nq = " << d.q << "\np = " << d.p << "\np_new = " << d.p_new << "\n";
    o << "n = " << d.n << "\nn_new = " << d.n_new << "\nnnz = " << d.nnz << "\n";
    o << "delta = " << format_double(d.delta) << "\nnoise = " << format_double(d.noise) << "\n";
    o << "init.phase1 = " << p.build.phase1_iterations << "\n";
    o << "init.phase2 = " << p.build.phase2_iterations << "\n";
    o << "reference.iterations = " << p.build.cg_bio_iterations << "\n\n";
  }

  for (const auto& name : known_algorithms()) {
    auto it = c.solver.find(name);
    if (it == c.solver.end()) continue;
    const SolverConfig& s = it->second;
    o << "[" << name << "]\n";
    o << "gamma.scale = " << format_double(s.gamma.scale) << "\n";
    o << "gamma.power = " << format_double(s.gamma.power) << "\n";
    o << "kt.mode = " << detail::kt_mode_name(s.kt.mode) << "\n";
    o << "kt.abs_const = " << format_double(s.kt.abs_const) << "\n";
    o << "kt.kappa = " << format_double(s.kt.kappa) << "\n";
    o << "kt.power = " << format_double(s.kt.power) << "\n";
    o << "batch = " << s.batch << "\n";
    o << "spider.q = " << s.spider_q << "\n";
    o << "spider.S = " << s.spider_S << "\n";
    o << "omega = " << format_double(s.omega) << "\n";
    o << "eps_f = " << format_double(s.eps_f) << "\n";
    o << "eps_g = " << format_double(s.eps_g) << "\n";
    o << "delta = " << format_double(s.delta) << "\n";
    o << "value_batch = " << s.value_batch << "\n";
    o << "aripseg.gamma0 = " << format_double(s.aripseg.gamma0) << "\n";
    o << "aripseg.rho0 = " << format_double(s.aripseg.rho0) << "\n";
    o << "aripseg.r = " << format_double(s.aripseg.r) << "\n";
    o << "dbgd.alpha = " << format_double(s.dbgd.alpha) << "\n";
    o << "dbgd.beta = " << format_double(s.dbgd.beta) << "\n";
    o << "dbgd.gamma = " << format_double(s.dbgd.gamma) << "\n";
    o << "dbgd.g_lower = " << format_double(s.dbgd.g_lower) << "\n\n";
  }
  return o.str();
}

/// Reads the INI-style format written by to_text on top of `base`. Keys may
/// be dotted (`gamma.scale`); list values are comma separated.
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (item.parents.empty() || item.parents.front() == "default") {
      throw ConfigError("key '" + item.name + "' is outside any section");
    }
    std::string key;
    for (std::size_t i = 1; i < item.parents.size(); ++i) key += item.parents[i] + ".";
    key += item.name;
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
    apply_key(base, item.parents.front(), key, value);
  }
  base.validate();
  return base;
}

/// The `[experiment] problem` key decides which defaults the rest overrides.
inline ExperimentConfig parse_config(const std::string& text) {
  ProblemKind kind = ProblemKind::kRegression;
  {
    std::istringstream probe(text);
    std::string line, section;
    while (std::getline(probe, line)) {
      const std::string t = detail::trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[') {
        section = detail::trim(t.substr(1, t.find(']') - 1));
        continue;
      }
      const auto eq = t.find('=');
      if (section == "experiment" && eq != std::string::npos && detail::trim(t.substr(0, eq)) == "problem") {
        kind = detail::trim(t.substr(eq + 1)) == "dictionary" ? ProblemKind::kDictionary : ProblemKind::kRegression;
      }
    }
  }
  std::istringstream in(text);
  return parse_config(in, default_config(kind));
}

}  // namespace sbcg::bench
