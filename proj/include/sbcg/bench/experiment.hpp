#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sbcg/bench/aggregate.hpp"
#include "sbcg/bench/config.hpp"
#include "sbcg/bench/datasets.hpp"
#include "sbcg/bench/reference_cache.hpp"
#include "sbcg/bench/runner.hpp"
#include "sbcg/bench/svg.hpp"
#include "sbcg/bench/trace.hpp"

namespace sbcg::bench {

using Logger = std::function<void(const std::string&)>;

inline RegressionProblem regression_problem_for(const ProblemSpec& p) {
  if (p.csv.empty()) return gen_synthetic_regression(p.rows, p.dim, p.noise, p.data_seed, p.lambda);
  if (fs::is_directory(p.csv)) return load_regression_data(p.csv, p.lambda);
  // A single table: the response column (last by default) and a seeded split into thirds.
  const NumericTable t = read_numeric_csv(p.csv);
  const Index target = p.target >= 0 ? p.target : t.data.cols() - 1;
  return load_regression_csv(p.csv, target, p.data_seed, p.lambda);
}

inline DictionaryProblem dictionary_problem_for(const ProblemSpec& p) {
  if (!p.csv.empty()) return load_dictionary_data(p.csv);
  return gen_dictionary_data(p.data_seed, p.dims);
}

/// The problem, references (through the cache when given) and start points
/// for a configuration. Everything here depends on the data seed only.
inline ExperimentInstance build_instance(const ExperimentConfig& c, ReferenceCache* cache = nullptr,
                                         const Logger& log = {}) {
  bool hit = false;
  SolverConfig warm = c.warm;
  warm.record_timing = false;
  ExperimentInstance inst =
      c.problem.kind == ProblemKind::kRegression
          ? make_regression_instance(regression_problem_for(c.problem), warm, c.problem.data_seed, cache, &hit)
          : make_dictionary_instance(dictionary_problem_for(c.problem), c.problem.data_seed, c.problem.build,
                                     cache, &hit);
  if (log && cache) log(std::string(hit ? "reference cache hit: " : "reference computed: ") + cache->path().string());
  return inst;
}

inline RunOutcome run_one(const std::string& algorithm, const ExperimentInstance& inst, const SolverConfig& cfg,
                          std::uint64_t seed) {
  RunOutcome o;
  o.algorithm = algorithm;
  o.seed = seed;
  try {
    RunTrace tr = run_algorithm(algorithm, inst, cfg, seed);
    o.ok = tr.status != RunStatus::kError;
    o.status = to_string(tr.status);
    o.iterations = tr.iterations;
    o.queries = tr.queries;
    o.fallbacks = tr.fallbacks;
    o.infeasible_cut = tr.infeasible_cut;
    o.message = tr.message;
    o.fw_gap_kind = tr.fw_gap_kind;
    o.records = std::move(tr.records);
    o.final_x = std::move(tr.final_x);
  } catch (const std::exception& e) {
    o.ok = false;
    o.status = "failed";
    o.message = e.what();
  }
  return o;
}

/// Every (algorithm, seed) pair of the configuration, in a fixed order.
inline std::vector<std::pair<std::string, std::uint64_t>> grid_jobs(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::uint64_t>> jobs;
  for (const auto& a : c.algorithms)
    for (auto s : c.seeds) jobs.emplace_back(a, s);
  return jobs;
}

/// Runs the grid on `threads` workers. Each run owns its RNG and state, so
/// the outcomes do not depend on the thread count.
inline std::vector<RunOutcome> run_grid(const ExperimentConfig& c, const ExperimentInstance& inst, unsigned threads,
                                        const Logger& log = {}) {
  const auto jobs = grid_jobs(c);
  std::vector<RunOutcome> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const auto& [a, s] = jobs[k];
      out[k] = run_one(a, inst, c.solver_for(a, s), s);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (log) {
    for (const auto& o : out) {
      if (!o.ok) log("run " + o.algorithm + " seed " + std::to_string(o.seed) + " " + o.status + ": " + o.message);
    }
  }
  return out;
}

inline std::string meta_text(const RunOutcome& o, const ExperimentInstance& inst, const ExperimentConfig& c,
                             const std::string& trace_bytes) {
  const ProblemConstants& k = inst.problem.constants;
  std::ostringstream m;
  m << "algorithm = " << o.algorithm << "\n";
  m << "seed = " << o.seed << "\n";
  m << "status = " << o.status << "\n";
  m << "message = " << sanitize_field(o.message) << "\n";
  m << "iterations = " << o.iterations << "\n";
  m << "queries = " << o.queries << "\n";
  m << "fallbacks = " << o.fallbacks << "\n";
  m << "infeasible_cut = " << (o.infeasible_cut ? "true" : "false") << "\n";
  m << "fw_gap_kind = " << o.fw_gap_kind << "\n";
  m << "problem = " << inst.problem.name << "\n";
  m << "task_metric = " << inst.problem.task_metric_name << "\n";
  m << "data_hash = " << inst.data_hash << "\n";
  m << "trace_hash = " << hex64(fnv1a(trace_bytes)) << "\n";
  m << "g_star = " << format_double(inst.refs.g_star) << "\n";
  m << "g_tolerance = " << format_double(inst.refs.tolerance) << "\n";
  m << "f_star = " << format_double(inst.refs.f_star) << "\n";
  m << "f_tolerance = " << format_double(inst.refs.f_tolerance) << "\n";
  m << "g_x0 = " << format_double(inst.refs.g_x0) << "\n";
  m << "start_queries = " << inst.start.queries << "\n";
  m << "L_f = " << format_double(k.L_f) << "\nL_g = " << format_double(k.L_g) << "\nL_l = " << format_double(k.L_l)
    << "\n";
  m << "sigma_f = " << format_double(k.sigma_f) << "\nsigma_g = " << format_double(k.sigma_g)
    << "\nsigma_l = " << format_double(k.sigma_l) << "\nD = " << format_double(k.D) << "\n";
  m << "# config\n" << to_text(c);
  return m.str();
}

/// Trace CSV, sidecar metadata and final iterate of one run.
inline void write_run_files(const fs::path& root, const RunOutcome& o, const ExperimentInstance& inst,
                            const ExperimentConfig& c) {
  const RunPaths paths = RunPaths::under(root, o.algorithm, o.seed);
  const std::string bytes = trace_csv(o.records);
  write_text_file(paths.trace, bytes);
  write_text_file(paths.meta, meta_text(o, inst, c, bytes));
  if (o.final_x.size() > 0) write_vector_csv(paths.final_iterate, o.final_x);
}

inline const std::vector<std::string>& plotted_metrics() {
  static const std::vector<std::string> m{"g_gap", "f_gap", "task_metric"};
  return m;
}

/// Grid, per-run files, aggregate tables and plots under `root`.
inline std::vector<AlgorithmAggregate> compare(const ExperimentConfig& c, const fs::path& root, unsigned threads,
                                               const Logger& log = {}) {
  c.validate();
  fs::create_directories(root);
  write_text_file(root / "config.ini", to_text(c));
  ReferenceCache cache(root / "references.csv");
  const ExperimentInstance inst = build_instance(c, &cache, log);
  const std::vector<RunOutcome> outcomes = run_grid(c, inst, threads, log);
  for (const auto& o : outcomes) write_run_files(root, o, inst, c);
  const auto aggs = aggregate_outcomes(c.algorithms, outcomes);
  write_text_file(root / "runs.csv", runs_csv(outcomes));
  write_text_file(root / "aggregate.csv", aggregate_csv(aggs));
  write_text_file(root / "final.csv", final_csv(aggs));
  std::map<std::string, std::vector<AggregatePoint>> series;
  for (const auto& a : aggs)
    if (a.final.aggregated) series[a.final.algorithm] = a.points;
  for (const auto& metric : plotted_metrics()) {
    PlotOptions opt;
    opt.metric = metric;
    opt.log_y = metric == "g_gap";
    write_text_file(root / (metric + ".svg"), render_svg(series, c.algorithms, opt));
  }
  for (const auto& a : aggs) {
    if (!a.final.aggregated && log) {
      log(a.final.algorithm + ": only " + std::to_string(a.final.runs) + " of " +
          std::to_string(a.final.runs + a.final.failed) + " seeds succeeded; not aggregated");
    }
  }
  return aggs;
}

}  // namespace sbcg::bench
