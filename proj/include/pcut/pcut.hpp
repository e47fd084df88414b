#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "ranking.hpp"
#include "rmd.hpp"
#include "rng.hpp"
#include "similarity.hpp"
#include "spectral.hpp"
#include "ssl.hpp"

namespace pcut {

enum class Task { clustering, ssl };
enum class Modality { similarity, connectivity };

inline const char* to_string(Task t) { return t == Task::clustering ? "clustering" : "ssl"; }
inline const char* to_string(Modality m) { return m == Modality::similarity ? "similarity" : "connectivity"; }

// lambda in {0, 0.2, ..., 1}
inline std::vector<double> default_similarity_lambdas() {
  std::vector<double> g;
  for (int i = 0; i <= 5; ++i) g.push_back(i / 5.0);
  return g;
}

// lambda in {0.5, 0.525, ..., 1}
inline std::vector<double> default_connectivity_lambdas() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(0.5 + i / 40.0);
  return g;
}

// {5,10,20,30,...,100,120,150} restricted to [1, n-1]
inline std::vector<std::size_t> default_k_grid(std::size_t n) {
  std::vector<std::size_t> g{5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 120, 150};
  std::erase_if(g, [n](std::size_t k) { return k < 1 || k + 1 > n; });
  return g;
}

inline std::vector<int> default_sigma_exponents() { return {-3, -2, -1, 0, 1, 2, 3}; }

struct PCutConfig {
  // Smallest admissible cluster, as a fraction of n.
  double delta = 0.05;
  std::size_t K = 2;
  Task task = Task::clustering;
  Modality modality = Modality::similarity;
  // Unset grids take the modality defaults; an explicitly empty grid is an error.
  std::optional<std::vector<double>> lambda_grid;
  std::optional<std::vector<std::size_t>> k_grid;
  std::optional<std::vector<int>> sigma_exponent_grid;
  // Similarity graphs carry RBF weights; when false, unit weights and no sigma grid.
  bool rbf_weights = true;
  LaplacianVariant variant = LaplacianVariant::ncut_normalized;
  bool normalize_rows = false;
  std::size_t kmeans_restarts = 10;
  std::size_t kmeans_max_iters = 100;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const {
    if (!(delta > 0.0 && delta <= 0.5)) throw ConfigError("delta must lie in (0, 0.5]");
    if (K < 2) throw ConfigError("K must be at least 2");
    if (lambda_grid && lambda_grid->empty()) throw ConfigError("lambda grid is empty");
    if (k_grid && k_grid->empty()) throw ConfigError("k grid is empty");
    if (sigma_exponent_grid && sigma_exponent_grid->empty()) throw ConfigError("sigma grid is empty");
    if (lambda_grid) {
      for (double l : *lambda_grid) {
        if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("lambda values must lie in [0,1]");
      }
    }
  }

  std::vector<double> lambdas() const {
    if (lambda_grid) return *lambda_grid;
    return modality == Modality::similarity ? default_similarity_lambdas() : default_connectivity_lambdas();
  }
};

// ceil(delta * n), guarded against representation error (5/26 * 26 -> 5).
inline std::size_t size_threshold(double delta, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(delta * static_cast<double>(n) - 1e-9));
}

struct CandidateParams {
  double lambda = 1.0;
  std::optional<std::size_t> k;
  std::optional<int> sigma_exponent;
  std::optional<double> sigma;
};

struct CandidateCut {
  std::size_t index = 0;  // grid order
  CandidateParams params;
  Partition partition;
  bool feasible = false;
  double baseline_cut = 0.0;
  double normalized_cut = 0.0;  // baseline_cut / baseline edge count
  std::size_t min_cluster_size = 0;
  std::size_t graph_edges = 0;
  // Set when the black box failed on this grid point (e.g. a GRF component
  // without labels); such candidates are never feasible.
  std::string failure;
};

class NoFeasiblePartition : public Error {
 public:
  NoFeasiblePartition(std::string msg, std::optional<CandidateCut> best)
      : Error(std::move(msg)), best_infeasible(std::move(best)) {}
  std::optional<CandidateCut> best_infeasible;
};

class UndefinedRatioError : public Error {
 public:
  using Error::Error;
};

struct CandidateSet {
  // configuration as run, with the modality set by the input type
  PCutConfig config;
  std::vector<CandidateCut> candidates;
  std::size_t n = 0;
  std::size_t threshold = 0;
  RankVector rank;
  // similarity only
  std::size_t construction_k = 0;
  std::size_t selection_k = 0;
  double selection_sigma = 0.0;
  std::size_t baseline_edges = 0;
  // connectivity only: nodes with no neighbors (eta forced to 0)
  std::vector<NodeId> isolated;
};

namespace detail {

template <typename Job>
void run_jobs(std::size_t count, std::size_t workers, Job&& job) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline void finish_candidate(CandidateCut& c, const WeightedGraph& baseline, std::size_t threshold) {
  c.baseline_cut = cut_value(baseline, c.partition);
  c.normalized_cut = baseline.num_edges() ? c.baseline_cut / static_cast<double>(baseline.num_edges()) : 0.0;
  c.min_cluster_size = c.partition.min_size();
  c.feasible = c.min_cluster_size >= threshold;
}

inline Partition black_box(const WeightedGraph& g, const PCutConfig& cfg, const std::optional<LabelSet>& labels,
                           std::uint64_t seed) {
  if (cfg.task == Task::ssl) return grf_propagate(g, *labels);
  SpectralConfig sc;
  sc.K = cfg.K;
  sc.variant = cfg.variant;
  sc.normalize_rows = cfg.normalize_rows;
  sc.kmeans_restarts = cfg.kmeans_restarts;
  sc.kmeans_max_iters = cfg.kmeans_max_iters;
  sc.seed = seed;
  return spectral_clustering(g, sc);
}

inline void check_labels(const PCutConfig& cfg, const std::optional<LabelSet>& labels, std::size_t n) {
  if (cfg.task != Task::ssl) return;
  if (!labels) throw ConfigError("the ssl task needs labels");
  if (labels->K != cfg.K) throw ConfigError("label set has " + std::to_string(labels->K) + " classes but K=" + std::to_string(cfg.K));
  labels->validate(n);
}

}  // namespace detail

// Similarity modality: rank once on the round(sqrt(n))-NN graph, then build an
// RMD graph per (lambda, k, sigma) grid point and evaluate each partition on
// the RBF-weighted model-selection baseline.
inline CandidateSet generate_candidates(const FeatureMatrix& f, PCutConfig cfg,
                                        const std::optional<LabelSet>& labels = std::nullopt) {
  cfg.modality = Modality::similarity;
  cfg.validate();
  const std::size_t n = f.n();
  if (cfg.K > n) throw ConfigError("K exceeds the number of samples");
  detail::check_labels(cfg, labels, n);

  const auto D = pairwise_distances(f);
  const auto order = neighbor_orders(D);
  const auto base = baseline_graph(D);

  CandidateSet out;
  out.config = cfg;
  out.n = n;
  out.threshold = size_threshold(cfg.delta, n);
  out.construction_k = base.construction_k;
  out.selection_k = base.selection_k;
  out.selection_sigma = base.selection_sigma;
  out.baseline_edges = base.selection.num_edges();
  out.rank = rank(eta_similarity(D, base.construction));

  auto ks = cfg.k_grid ? *cfg.k_grid : default_k_grid(n);
  std::erase_if(ks, [n](std::size_t k) { return k < 1 || k + 1 > n; });
  if (ks.empty()) throw ConfigError("no k in the grid satisfies 1 <= k < n");
  const auto sigmas = cfg.rbf_weights ? (cfg.sigma_exponent_grid ? *cfg.sigma_exponent_grid : default_sigma_exponents())
                                      : std::vector<int>{};
  std::vector<double> dk(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) dk[i] = avg_knn_distance(D, ks[i]);

  for (double lambda : cfg.lambdas()) {
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      if (!cfg.rbf_weights) {
        CandidateCut c;
        c.params = {lambda, ks[ki], std::nullopt, std::nullopt};
        out.candidates.push_back(std::move(c));
        continue;
      }
      for (int j : sigmas) {
        CandidateCut c;
        c.params = {lambda, ks[ki], j, std::ldexp(dk[ki], j)};
        out.candidates.push_back(std::move(c));
      }
    }
  }
  for (std::size_t i = 0; i < out.candidates.size(); ++i) out.candidates[i].index = i;

  detail::run_jobs(out.candidates.size(), cfg.workers, [&](std::size_t i) {
    auto& c = out.candidates[i];
    try {
      const auto w = c.params.sigma ? Weighting::rbf(*c.params.sigma) : Weighting::unit();
      const auto g = rmd_similarity_graph(D, order, out.rank, {c.params.lambda, *c.params.k}, w);
      c.graph_edges = g.num_edges();
      c.partition = detail::black_box(g, cfg, labels, derive_seed(cfg.seed, i));
      detail::finish_candidate(c, base.selection, out.threshold);
    } catch (const ConstraintError& e) {
      c.failure = e.what();
    } catch (const ParameterError& e) {
      c.failure = e.what();
    } catch (const NumericError& e) {
      c.failure = e.what();
    }
  });
  return out;
}

// Connectivity modality: rank from common-neighbor counts on the input graph,
// sparsify per lambda, and evaluate each partition on the unweighted input.
inline CandidateSet generate_candidates(const WeightedGraph& g, PCutConfig cfg,
                                        const std::optional<LabelSet>& labels = std::nullopt) {
  cfg.modality = Modality::connectivity;
  cfg.validate();
  const std::size_t n = g.n();
  if (cfg.K > n) throw ConfigError("K exceeds the number of nodes");
  detail::check_labels(cfg, labels, n);

  CandidateSet out;
  out.config = cfg;
  out.n = n;
  out.threshold = size_threshold(cfg.delta, n);
  const auto common = common_neighbor_counts(g);
  out.rank = rank(eta_connectivity(g));
  out.isolated = isolated_nodes(g);
  const auto baseline = g.unweighted();
  out.baseline_edges = baseline.num_edges();

  for (double lambda : cfg.lambdas()) {
    CandidateCut c;
    c.params.lambda = lambda;
    out.candidates.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < out.candidates.size(); ++i) out.candidates[i].index = i;

  detail::run_jobs(out.candidates.size(), cfg.workers, [&](std::size_t i) {
    auto& c = out.candidates[i];
    try {
      const auto sparse = rmd_connectivity_graph(g, out.rank, c.params.lambda, common);
      c.graph_edges = sparse.num_edges();
      c.partition = detail::black_box(sparse, cfg, labels, derive_seed(cfg.seed, i));
      detail::finish_candidate(c, baseline, out.threshold);
    } catch (const ConstraintError& e) {
      c.failure = e.what();
    } catch (const NumericError& e) {
      c.failure = e.what();
    }
  });
  return out;
}

// True when a should be preferred over b among feasible candidates.
inline bool better_candidate(const CandidateCut& a, const CandidateCut& b) {
  if (a.baseline_cut != b.baseline_cut) return a.baseline_cut < b.baseline_cut;
  if (a.params.lambda != b.params.lambda) return a.params.lambda > b.params.lambda;
  if (a.min_cluster_size != b.min_cluster_size) return a.min_cluster_size > b.min_cluster_size;
  return a.index < b.index;
}

// Minimum baseline cut among feasible candidates.
inline const CandidateCut& pcut_select(const std::vector<CandidateCut>& cands) {
  if (cands.empty()) throw ConfigError("no candidates to select from");
  const CandidateCut* best = nullptr;
  const CandidateCut* best_infeasible = nullptr;
  for (const auto& c : cands) {
    if (!c.failure.empty()) continue;
    if (c.feasible) {
      if (!best || better_candidate(c, *best)) best = &c;
    } else if (!best_infeasible || better_candidate(c, *best_infeasible)) {
      best_infeasible = &c;
    }
  }
  if (best) return *best;
  std::string msg = "no-feasible-partition: none of " + std::to_string(cands.size()) +
                    " candidates meets the minimum cluster size";
  std::optional<CandidateCut> diag;
  if (best_infeasible) {
    msg += "; best infeasible candidate #" + std::to_string(best_infeasible->index) + " (lambda=" +
           std::to_string(best_infeasible->params.lambda) + ", cut=" + std::to_string(best_infeasible->baseline_cut) +
           ", min cluster size=" + std::to_string(best_infeasible->min_cluster_size) + ")";
    diag = *best_infeasible;
  }
  throw NoFeasiblePartition(msg, std::move(diag));
}

struct CutRatio {
  double q;
  double y;
  double rcut_ratio;
};

// q = Cut(p) / Cut(p_balanced), y = smaller cluster share, and the ratio of
// RCut values q / (4 y (1 - y)).
inline CutRatio cut_ratio_diagnostics(const WeightedGraph& g, const Partition& p, const Partition& p_balanced) {
  if (p.K != 2 || p_balanced.K != 2) throw ParameterError("cut-ratio diagnostics need binary partitions");
  const double balanced = cut_value(g, p_balanced);
  if (!(balanced > 0.0)) throw UndefinedRatioError("balanced partition has zero cut; the cut ratio is undefined");
  const double q = cut_value(g, p) / balanced;
  const auto sizes = p.sizes();
  const double y = static_cast<double>(std::min(sizes[0], sizes[1])) / static_cast<double>(p.n());
  if (!(y > 0.0)) throw UndefinedRatioError("partition has an empty side; the RCut ratio is undefined");
  return {q, y, q / (4.0 * y * (1.0 - y))};
}

struct PCutResult {
  CandidateSet set;
  CandidateCut selected;
  double seconds_candidates = 0.0;
  double seconds_select = 0.0;
};

template <typename Input>
PCutResult run_pcut(const Input& input, const PCutConfig& cfg, const std::optional<LabelSet>& labels = std::nullopt) {
  using clock = std::chrono::steady_clock;
  PCutResult r;
  const auto t0 = clock::now();
  r.set = generate_candidates(input, cfg, labels);
  const auto t1 = clock::now();
  r.selected = pcut_select(r.set.candidates);
  const auto t2 = clock::now();
  r.seconds_candidates = std::chrono::duration<double>(t1 - t0).count();
  r.seconds_select = std::chrono::duration<double>(t2 - t1).count();
  return r;
}

}  // namespace pcut
