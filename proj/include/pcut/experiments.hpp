#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "graph.hpp"
#include "pcut.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "synth.hpp"

namespace pcut {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"sbm-lambda-sweep", "sbm-alpha-sweep", "karate", "dolphins", "crescents"};
  return names;
}

struct RunRecord {
  std::string name;  // file stem
  Json report;
};

struct ExperimentBundle {
  std::string name;
  std::vector<RunRecord> runs;
  std::string aggregate_csv;
  Json summary;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for fewer than two values
};

inline MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd r;
  if (xs.empty()) return r;
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

// pcut / sc error ratio; 1 when both are zero, infinite when only sc is zero.
inline double error_ratio(double pcut, double sc) {
  if (sc > 0.0) return pcut / sc;
  return pcut > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// One PCut run scored against ground truth.
struct ScoredRun {
  CandidateSet set;
  std::vector<double> errors;  // per candidate, NaN for failed candidates
  std::size_t selected = 0;    // candidate index
  bool fallback = false;       // no feasible candidate; the lambda=1 candidate stands in
  std::size_t plain = 0;       // index of the plain black-box candidate used for comparison
  Json report;
};

namespace detail {

inline Json timing_json(double seconds, std::size_t workers) {
  return {{"seconds", seconds}, {"workers", workers}};
}

// Index of the best lambda=1 candidate by the usual selection rule, ignoring
// feasibility when none is feasible.
inline std::size_t plain_candidate(const std::vector<CandidateCut>& cands) {
  std::optional<std::size_t> best, best_any;
  for (const auto& c : cands) {
    if (c.params.lambda != 1.0 || !c.failure.empty()) continue;
    if (!best_any || better_candidate(c, cands[*best_any])) best_any = c.index;
    if (c.feasible && (!best || better_candidate(c, cands[*best]))) best = c.index;
  }
  if (best) return *best;
  if (best_any) return *best_any;
  throw NumericError("the lambda=1 candidate failed");
}

}  // namespace detail

template <typename Input>
ScoredRun scored_run(const Input& input, const PCutConfig& cfg, const Partition& truth, Manifest manifest) {
  const auto t0 = std::chrono::steady_clock::now();
  ScoredRun r;
  r.set = generate_candidates(input, cfg);
  r.plain = detail::plain_candidate(r.set.candidates);
  try {
    r.selected = pcut_select(r.set.candidates).index;
  } catch (const NoFeasiblePartition&) {
    r.fallback = true;
    r.selected = r.plain;
  }
  for (const auto& c : r.set.candidates) {
    r.errors.push_back(c.failure.empty() ? clustering_error(c.partition, truth).error_rate
                                         : std::numeric_limits<double>::quiet_NaN());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& sel = r.set.candidates[r.selected];
  r.report = make_report(manifest, r.set, r.fallback ? nullptr : &sel, detail::timing_json(secs, cfg.workers));
  Json ev;
  Json errs = Json::array();
  for (double e : r.errors) errs.push_back(number_or_null(e));
  ev["candidate_errors"] = errs;
  ev["selected_index"] = r.selected;
  ev["selected_error"] = r.errors[r.selected];
  ev["plain_index"] = r.plain;
  ev["plain_error"] = r.errors[r.plain];
  ev["fallback_to_plain"] = r.fallback;
  r.report["evaluation"] = ev;
  return r;
}

struct SbmLambdaSweepOptions {
  std::size_t n = 500;
  double alpha = 0.05;
  double p1 = 0.2;
  double q = 0.03;
  std::size_t seeds = 20;
  std::uint64_t seed = 0;
  double delta = 0.05;
  std::size_t workers = 1;
};

inline ExperimentBundle sbm_lambda_sweep(const SbmLambdaSweepOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentBundle b;
  b.name = "sbm-lambda-sweep";
  PCutConfig cfg;
  cfg.modality = Modality::connectivity;
  cfg.delta = o.delta;
  cfg.workers = o.workers;
  const auto lambdas = cfg.lambdas();
  std::vector<std::vector<double>> err(lambdas.size()), ncut(lambdas.size());
  std::vector<double> sc, pc, gaps;
  std::size_t fallbacks = 0;
  for (std::size_t s = 0; s < o.seeds; ++s) {
    SbmSpec spec{o.n, o.alpha, o.p1, o.p1, o.q, true, derive_seed(o.seed, s)};
    const auto lg = sbm_generate(spec);
    cfg.seed = spec.seed;
    Manifest m{"experiment sbm-lambda-sweep", spec.seed, {{"graph", "generated", format_edge_list(lg.graph)}}, {}};
    auto run = scored_run(lg.graph, cfg, lg.truth, m);
    run.report["sbm"] = {{"n", o.n}, {"alpha", o.alpha}, {"p1", o.p1}, {"p2", spec.effective_p2()}, {"q", o.q}};
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      err[i].push_back(run.errors[i]);
      ncut[i].push_back(run.set.candidates[i].normalized_cut);
    }
    sc.push_back(run.errors[run.plain]);
    pc.push_back(run.errors[run.selected]);
    double best = std::numeric_limits<double>::infinity();
    for (double e : run.errors) {
      if (!std::isnan(e)) best = std::min(best, e);
    }
    gaps.push_back(run.errors[run.selected] - best);
    fallbacks += run.fallback ? 1 : 0;
    char stem[32];
    std::snprintf(stem, sizeof stem, "run_%03zu", s);
    b.runs.push_back({stem, std::move(run.report)});
  }
  std::string csv = "lambda,error_mean,error_sd,normalized_cut_mean,normalized_cut_sd,runs\n";
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto e = mean_sd(err[i]), c = mean_sd(ncut[i]);
    csv += fmt(lambdas[i]) + ',' + fmt(e.mean) + ',' + fmt(e.sd) + ',' + fmt(c.mean) + ',' + fmt(c.sd) + ',' +
           std::to_string(err[i].size()) + '\n';
  }
  b.aggregate_csv = csv;
  const auto s = mean_sd(sc), p = mean_sd(pc);
  b.summary = {{"experiment", b.name},
               {"n", o.n},
               {"alpha", o.alpha},
               {"p1", o.p1},
               {"q", o.q},
               {"seeds", o.seeds},
               {"delta", o.delta},
               {"sc_error_mean", s.mean},
               {"sc_error_sd", s.sd},
               {"pcut_error_mean", p.mean},
               {"pcut_error_sd", p.sd},
               {"relative_reduction", number_or_null(1.0 - error_ratio(p.mean, s.mean))},
               {"selected_error_gap_mean", mean_sd(gaps).mean},
               {"no_feasible_runs", fallbacks}};
  b.summary["timings"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  return b;
}

struct SbmAlphaSweepOptions {
  std::vector<double> alphas{0.025, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5};
  std::size_t n = 500;
  double p1 = 0.2;
  // q(alpha) = q_scale / alpha
  double q_scale = 0.0015;
  std::size_t seeds = 20;
  std::uint64_t seed = 0;
  // delta = min(delta_cap, alpha) so the planted split stays admissible
  double delta_cap = 0.05;
  std::size_t workers = 1;
};

inline ExperimentBundle sbm_alpha_sweep(const SbmAlphaSweepOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentBundle b;
  b.name = "sbm-alpha-sweep";
  std::string csv = "alpha,q,delta,sc_error_mean,sc_error_sd,pcut_error_mean,pcut_error_sd,error_ratio,no_feasible_runs\n";
  Json rows = Json::array();
  for (std::size_t ai = 0; ai < o.alphas.size(); ++ai) {
    const double alpha = o.alphas[ai];
    const double q = o.q_scale / alpha;
    PCutConfig cfg;
    cfg.modality = Modality::connectivity;
    cfg.delta = std::min(o.delta_cap, alpha);
    cfg.workers = o.workers;
    std::vector<double> sc, pc;
    std::size_t fallbacks = 0;
    for (std::size_t s = 0; s < o.seeds; ++s) {
      SbmSpec spec{o.n, alpha, o.p1, o.p1, q, true, derive_seed(o.seed, ai * 1000003 + s)};
      const auto lg = sbm_generate(spec);
      cfg.seed = spec.seed;
      Manifest m{"experiment sbm-alpha-sweep", spec.seed, {{"graph", "generated", format_edge_list(lg.graph)}}, {}};
      auto run = scored_run(lg.graph, cfg, lg.truth, m);
      run.report["sbm"] = {{"n", o.n}, {"alpha", alpha}, {"p1", o.p1}, {"p2", spec.effective_p2()}, {"q", q}};
      sc.push_back(run.errors[run.plain]);
      pc.push_back(run.errors[run.selected]);
      fallbacks += run.fallback ? 1 : 0;
      char stem[48];
      std::snprintf(stem, sizeof stem, "alpha_%g_run_%03zu", alpha, s);
      b.runs.push_back({stem, std::move(run.report)});
    }
    const auto a = mean_sd(sc), p = mean_sd(pc);
    const double ratio = error_ratio(p.mean, a.mean);
    csv += fmt(alpha) + ',' + fmt(q) + ',' + fmt(cfg.delta) + ',' + fmt(a.mean) + ',' + fmt(a.sd) + ',' + fmt(p.mean) +
           ',' + fmt(p.sd) + ',' + fmt(ratio) + ',' + std::to_string(fallbacks) + '\n';
    rows.push_back({{"alpha", alpha},
                    {"q", q},
                    {"delta", cfg.delta},
                    {"sc_error_mean", a.mean},
                    {"sc_error_sd", a.sd},
                    {"pcut_error_mean", p.mean},
                    {"pcut_error_sd", p.sd},
                    {"error_ratio", number_or_null(ratio)},
                    {"no_feasible_runs", fallbacks}});
  }
  b.aggregate_csv = csv;
  b.summary = {{"experiment", b.name}, {"n", o.n}, {"p1", o.p1}, {"q_scale", o.q_scale}, {"seeds", o.seeds}, {"alphas", rows}};
  b.summary["timings"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  return b;
}

// Keeps every node not listed in `removed` (0-based), in order.
inline std::vector<NodeId> complement_nodes(std::size_t n, const std::vector<NodeId>& removed) {
  std::vector<bool> drop(n, false);
  for (auto v : removed) {
    if (v >= n) throw ParameterError("removed node " + std::to_string(v) + " is out of range");
    drop[v] = true;
  }
  std::vector<NodeId> keep;
  for (NodeId v = 0; v < n; ++v) {
    if (!drop[v]) keep.push_back(v);
  }
  return keep;
}

inline Partition restrict_partition(const Partition& p, const std::vector<NodeId>& keep) {
  std::vector<std::size_t> labels;
  labels.reserve(keep.size());
  for (auto v : keep) labels.push_back(p.labels.at(v));
  return Partition(std::move(labels), p.K);
}

struct KarateOptions {
  WeightedGraph graph;
  Partition truth;
  std::string graph_text;  // for the manifest digest
  std::vector<NodeId> removed;  // 0-based ids dropped for the reduced run
  // delta = min_size / n for each run
  std::size_t min_size = 5;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// The 0-based ids of the eight members removed in the reduced run.
inline std::vector<NodeId> karate_reduced_removals() { return {14, 15, 18, 20, 22, 23, 26, 29}; }

inline ExperimentBundle karate_experiment(const KarateOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentBundle b;
  b.name = "karate";
  std::string csv = "graph,n,delta,sc_errors,sc_error_rate,pcut_errors,pcut_error_rate,pcut_lambda,pcut_misattributed\n";
  Json rows = Json::array();
  for (int reduced = 0; reduced < 2; ++reduced) {
    const auto keep = complement_nodes(o.graph.n(), reduced ? o.removed : std::vector<NodeId>{});
    const auto g = o.graph.induced(keep);
    const auto truth = restrict_partition(o.truth, keep);
    PCutConfig cfg;
    cfg.modality = Modality::connectivity;
    cfg.delta = static_cast<double>(o.min_size) / static_cast<double>(g.n());
    cfg.seed = o.seed;
    cfg.workers = o.workers;
    Manifest m{"experiment karate", o.seed, {{"graph", "karate", o.graph_text}}, {}};
    auto run = scored_run(g, cfg, truth, m);
    const auto& sel = run.set.candidates[run.selected];
    const auto& plain = run.set.candidates[run.plain];
    const auto sc_rep = clustering_error(plain.partition, truth);
    const auto pc_rep = clustering_error(sel.partition, truth);
    // misattributed nodes in the original 1-based numbering
    std::vector<std::size_t> wrong;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (pc_rep.matching[sel.partition.labels[i]] != truth.labels[i]) wrong.push_back(keep[i] + 1);
    }
    std::vector<std::size_t> sc_wrong;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (sc_rep.matching[plain.partition.labels[i]] != truth.labels[i]) sc_wrong.push_back(keep[i] + 1);
    }
    const std::string label = reduced ? "reduced" : "full";
    std::string wrong_s;
    for (auto w : wrong) wrong_s += (wrong_s.empty() ? "" : " ") + std::to_string(w);
    csv += label + ',' + std::to_string(g.n()) + ',' + fmt(cfg.delta) + ',' + std::to_string(sc_rep.errors) + ',' +
           fmt(sc_rep.error_rate) + ',' + std::to_string(pc_rep.errors) + ',' + fmt(pc_rep.error_rate) + ',' +
           fmt(sel.params.lambda) + ",\"" + wrong_s + "\"\n";
    rows.push_back({{"graph", label},
                    {"n", g.n()},
                    {"delta", cfg.delta},
                    {"removed", reduced ? o.removed : std::vector<NodeId>{}},
                    {"sc_errors", sc_rep.errors},
                    {"sc_error_rate", sc_rep.error_rate},
                    {"sc_misattributed", sc_wrong},
                    {"pcut_errors", pc_rep.errors},
                    {"pcut_error_rate", pc_rep.error_rate},
                    {"pcut_lambda", sel.params.lambda},
                    {"pcut_misattributed", wrong},
                    {"fallback_to_plain", run.fallback}});
    b.runs.push_back({label, std::move(run.report)});
  }
  b.aggregate_csv = csv;
  b.summary = {{"experiment", b.name}, {"runs", rows}};
  b.summary["timings"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  return b;
}

struct DolphinsOptions {
  WeightedGraph graph;
  Partition truth;
  std::string graph_text;
  std::vector<std::size_t> removals{4, 8, 12};
  std::size_t samplings = 100;
  std::size_t min_size = 5;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// r distinct nodes drawn uniformly (partial Fisher-Yates), sorted.
inline std::vector<NodeId> sample_removal(std::size_t n, std::size_t r, CounterRng& rng) {
  if (r >= n) throw ParameterError("cannot remove " + std::to_string(r) + " of " + std::to_string(n) + " nodes");
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  for (std::size_t i = 0; i < r; ++i) std::swap(ids[i], ids[i + rng.below(n - i)]);
  ids.resize(r);
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline ExperimentBundle dolphins_experiment(const DolphinsOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentBundle b;
  b.name = "dolphins";
  if (o.truth.n() != o.graph.n()) throw DimensionError("truth labels do not cover the graph");
  std::string csv = "removed,samplings,sc_error_mean,sc_error_sd,pcut_error_mean,pcut_error_sd,relative_reduction,no_feasible_runs\n";
  Json rows = Json::array();
  // removals come from the smaller community
  const auto sizes = o.truth.sizes();
  const std::size_t small = static_cast<std::size_t>(std::min_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<NodeId> pool;
  for (NodeId v = 0; v < o.truth.n(); ++v) {
    if (o.truth.labels[v] == small) pool.push_back(v);
  }
  for (std::size_t r : o.removals) {
    std::vector<double> sc, pc;
    std::size_t fallbacks = 0;
    for (std::size_t s = 0; s < o.samplings; ++s) {
      CounterRng rng(o.seed, "dolphins-removal", r * 1000003 + s);
      std::vector<NodeId> removed;
      for (auto i : sample_removal(pool.size(), r, rng)) removed.push_back(pool[i]);
      const auto keep = complement_nodes(o.graph.n(), removed);
      const auto g = o.graph.induced(keep);
      const auto truth = restrict_partition(o.truth, keep);
      PCutConfig cfg;
      cfg.modality = Modality::connectivity;
      cfg.delta = static_cast<double>(o.min_size) / static_cast<double>(g.n());
      cfg.seed = derive_seed(o.seed, r * 1000003 + s);
      cfg.workers = o.workers;
      Manifest m{"experiment dolphins", cfg.seed, {{"graph", "dolphins", o.graph_text}}, {}};
      auto run = scored_run(g, cfg, truth, m);
      run.report["removed"] = removed;
      sc.push_back(run.errors[run.plain]);
      pc.push_back(run.errors[run.selected]);
      fallbacks += run.fallback ? 1 : 0;
      char stem[48];
      std::snprintf(stem, sizeof stem, "removed_%02zu_run_%03zu", r, s);
      b.runs.push_back({stem, std::move(run.report)});
    }
    const auto a = mean_sd(sc), p = mean_sd(pc);
    const double red = 1.0 - error_ratio(p.mean, a.mean);
    csv += std::to_string(r) + ',' + std::to_string(o.samplings) + ',' + fmt(a.mean) + ',' + fmt(a.sd) + ',' +
           fmt(p.mean) + ',' + fmt(p.sd) + ',' + fmt(red) + ',' + std::to_string(fallbacks) + '\n';
    rows.push_back({{"removed", r},
                    {"samplings", o.samplings},
                    {"sc_error_mean", a.mean},
                    {"sc_error_sd", a.sd},
                    {"pcut_error_mean", p.mean},
                    {"pcut_error_sd", p.sd},
                    {"relative_reduction", number_or_null(red)},
                    {"no_feasible_runs", fallbacks}});
  }
  b.aggregate_csv = csv;
  b.summary = {{"experiment", b.name}, {"rows", rows}};
  b.summary["timings"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  return b;
}

struct CrescentOptions {
  std::size_t n = 1000;
  std::vector<double> fractions{0.45, 0.45, 0.10};
  double noise = 0.1;
  double delta = 0.05;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// Three-cluster similarity run: PCut over the full grid against the best
// lambda=1 (plain k-NN) candidate.
inline ExperimentBundle crescents_experiment(const CrescentOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentBundle b;
  b.name = "crescents";
  const auto data = crescent_dataset(o.n, o.fractions, o.noise, o.seed);
  PCutConfig cfg;
  cfg.modality = Modality::similarity;
  cfg.K = 3;
  cfg.delta = o.delta;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  Manifest m{"experiment crescents", o.seed, {{"features", "generated", format_feature_csv(data.features)}}, {}};
  auto run = scored_run(data.features, cfg, data.truth, m);
  run.report["crescent_geometry"] = crescent_geometry_json();
  run.report["crescent_noise"] = o.noise;
  std::string csv = "method,error_rate,lambda,k,sigma,baseline_cut\n";
  Json rows = Json::array();
  for (auto [name, idx] : {std::pair<const char*, std::size_t>{"sc", run.plain}, {"pcut", run.selected}}) {
    const auto& c = run.set.candidates[idx];
    csv += std::string(name) + ',' + fmt(run.errors[idx]) + ',' + fmt(c.params.lambda) + ',' +
           std::to_string(c.params.k.value_or(0)) + ',' + fmt(c.params.sigma.value_or(0.0)) + ',' + fmt(c.baseline_cut) + '\n';
    rows.push_back({{"method", name}, {"error_rate", run.errors[idx]}, {"candidate", candidate_json(c)}});
  }
  b.runs.push_back({"run", std::move(run.report)});
  b.aggregate_csv = csv;
  b.summary = {{"experiment", b.name}, {"n", o.n}, {"noise", o.noise}, {"geometry", crescent_geometry_json()}, {"methods", rows}};
  b.summary["timings"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  return b;
}

}  // namespace pcut
