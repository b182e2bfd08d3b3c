#pragma once

#include <string>
#include <vector>

#include "sbcg/bench/reference_cache.hpp"
#include "sbcg/io.hpp"
#include "sbcg/problems/dictionary.hpp"
#include "sbcg/problems/regression.hpp"
#include "sbcg/reference.hpp"
#include "sbcg/solvers.hpp"

namespace sbcg::bench {

/// A problem ready to run: oracles, reference values, and the shared start.
struct ExperimentInstance {
  BilevelProblem problem;
  ReferenceValues refs;
  StartPoint start;  // x0, g(x0), and the queries spent finding it
  StartPoint baseline_start;  // where the projection-based baselines begin
  std::string data_hash;
};

inline const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names{"SBCGI",    "SBCGF",    "SBCGI-M",   "SBCGF-M",
                                              "STORM-FW", "SPIDER-FW", "aR-IP-SeG", "DBGD-sto"};
  return names;
}

inline bool is_known_algorithm(const std::string& name) {
  for (const auto& n : known_algorithms())
    if (n == name) return true;
  return false;
}

/// One run of a named method. Cutting-plane and single-level methods start
/// from x0; the projection-based baselines from baseline_start, each charged
/// the queries spent reaching its start. STORM-FW and SPIDER-FW are the
/// cutting-plane methods with the cut removed, i.e. conditional gradient on
/// the upper objective over Z.
inline RunTrace run_algorithm(const std::string& name, const ExperimentInstance& inst, const SolverConfig& cfg,
                              std::uint64_t seed) {
  Rng rng(seed);
  const BilevelProblem& p = inst.problem;
  if (name == "SBCGI") return sbcgi_run(p, cfg, inst.start, rng, inst.refs);
  if (name == "SBCGF") return sbcgf_run(p, cfg, inst.start, rng, inst.refs);
  if (name == "SBCGI-M") return sbcg_m_run(p, cfg, inst.start, rng, inst.refs, SbcgVariant::kSbcgi);
  if (name == "SBCGF-M") return sbcg_m_run(p, cfg, inst.start, rng, inst.refs, SbcgVariant::kSbcgf);
  if (name == "STORM-FW" || name == "SPIDER-FW") {
    const EstimatorKind kind = name == "STORM-FW" ? EstimatorKind::kStorm : EstimatorKind::kSpider;
    return fw_single_level_run(p, Level::kUpper, cfg, inst.start.x0, inst.start.queries, rng, inst.refs, kind);
  }
  if (name == "aR-IP-SeG" || name == "DBGD-sto") {
    SolverConfig shifted = cfg;
    const StartPoint& b = inst.baseline_start;
    if (cfg.query_budget > 0) shifted.query_budget = std::max<std::int64_t>(1, cfg.query_budget - b.queries);
    RunTrace tr = name == "aR-IP-SeG" ? aripseg_run(p, shifted, b.x0, rng, inst.refs)
                                      : dbgd_sto_run(p, shifted, b.x0, rng, inst.refs);
    for (auto& r : tr.records) r.oracle_queries += b.queries;
    tr.queries += b.queries;
    return tr;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

inline std::string regression_data_hash(const RegressionProblem& rp) {
  std::uint64_t h = hash_matrix(rp.b_tr, hash_matrix(rp.A_tr));
  h = hash_matrix(rp.b_val, hash_matrix(rp.A_val, h));
  return hex64(hash_matrix(rp.b_test, hash_matrix(rp.A_test, h)));
}

inline std::string reference_key(const std::string& data_hash, const std::string& settings,
                                 const ReferenceConfig& rc) {
  return hex64(fnv1a(data_hash + "|" + settings + "|" + format_double(rc.g_gap_tol) + "|" +
                     format_double(rc.f_gap_tol)));
}

/// Regression instance: references from the certified solver, x0 from the
/// lower-level warm start (verified against g*). The baselines start at the
/// origin and do not pay for the warm start.
inline ExperimentInstance make_regression_instance(const RegressionProblem& rp, const SolverConfig& warm_cfg,
                                                   std::uint64_t seed, ReferenceCache* cache = nullptr,
                                                   bool* cache_hit = nullptr) {
  ExperimentInstance inst{regression_oracles(rp), {}, {}, {}, {}};
  inst.data_hash = regression_data_hash(rp);
  const ReferenceConfig rc;
  auto compute = [&] { return regression_reference(rp, inst.problem, rc); };
  if (cache) {
    inst.refs = cache->get_or_compute(
        reference_key(inst.data_hash, "regression|" + format_double(rp.lambda), rc), compute, cache_hit);
  } else {
    inst.refs = compute();
  }
  Rng rng(seed);
  inst.start = warm_start_x0(inst.problem, warm_cfg, Vector::Zero(rp.A_tr.cols()), rng, inst.refs.g_star);
  inst.refs.g_x0 = inst.start.g_x0;
  const Vector origin = Vector::Zero(rp.A_tr.cols());
  inst.baseline_start = StartPoint{origin, inst.problem.lower->full_value(origin), 0};
  return inst;
}

struct DictionaryBuild {
  long phase1_iterations = 10000;
  long phase2_iterations = 10000;
  long cg_bio_iterations = 5000;
};

/// Dictionary instance: two-phase initialization on the old data; g* by the
/// certified lower solve, f* by a long deterministic cutting-plane run.
inline ExperimentInstance make_dictionary_instance(const DictionaryProblem& pr, std::uint64_t seed,
                                                   const DictionaryBuild& build = {},
                                                   ReferenceCache* cache = nullptr, bool* cache_hit = nullptr) {
  const TwoPhaseResult init = dictionary_two_phase_init(pr, seed, build.phase1_iterations, build.phase2_iterations);
  DictionaryInstance di = dictionary_oracles(pr, init.D, init.X, seed + 1);
  ExperimentInstance inst{di.problem, {}, {}, {}, {}};
  inst.data_hash = hex64(hash_matrix(pr.A_new, hash_matrix(pr.A, hash_matrix(pr.D_true))));
  ReferenceConfig rc;
  rc.cg_bio_iterations = build.cg_bio_iterations;
  auto compute = [&] {
    ReferenceValues r;
    const ApgResult low = lower_level_optimum(inst.problem, di.x0, rc);
    r.g_star = low.value;
    r.tolerance = std::max(low.gap, 1e-15);
    const CgBioResult est = deterministic_cg_bio(inst.problem, di.x0, rc.cg_bio_iterations);
    r.f_star = est.f_value;
    r.f_tolerance = std::max(std::abs(est.surrogate_gap), 1e-15);
    return r;
  };
  if (cache) {
    const std::string settings = "dictionary|" + std::to_string(seed) + "|" + std::to_string(build.phase1_iterations) +
                                 "|" + std::to_string(build.phase2_iterations) + "|" +
                                 std::to_string(build.cg_bio_iterations) + "|" + format_double(pr.dims.delta);
    inst.refs = cache->get_or_compute(reference_key(inst.data_hash, settings, rc), compute, cache_hit);
  } else {
    inst.refs = compute();
  }
  inst.start = StartPoint{di.x0, inst.problem.lower->full_value(di.x0), pr.dims.n};  // one exact pass for g(x0)
  inst.refs.g_x0 = inst.start.g_x0;
  inst.baseline_start = inst.start;  // all methods share the initial point here
  return inst;
}

}  // namespace sbcg::bench
