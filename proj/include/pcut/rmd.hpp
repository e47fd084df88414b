#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "ranking.hpp"
#include "similarity.hpp"

namespace pcut {

// Rank-modulated degree parameters. lambda = 1 disables modulation.
struct ModulationSpec {
  double lambda = 1.0;
  std::size_t k = 1;

  void validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in [0,1]");
    if (k < 1) throw ParameterError("k must be at least 1");
  }
};

// k * (lambda + 2 (1 - lambda) r), rounded to nearest and clamped to [1, n-1].
inline std::size_t modulated_k(std::size_t k, double lambda, double r, std::size_t n) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in [0,1]");
  if (!(r >= 0.0 && r <= 1.0)) throw ParameterError("rank must lie in [0,1]");
  if (n < 2) throw ParameterError("need at least two nodes");
  const double raw = static_cast<double>(k) * (lambda + 2.0 * (1.0 - lambda) * r);
  const auto rounded = std::llround(raw);
  return static_cast<std::size_t>(std::clamp<long long>(rounded, 1, static_cast<long long>(n - 1)));
}

inline std::vector<std::size_t> modulated_degrees(const RankVector& r, const ModulationSpec& spec) {
  spec.validate();
  std::vector<std::size_t> out(r.size());
  for (std::size_t v = 0; v < r.size(); ++v) out[v] = modulated_k(spec.k, spec.lambda, r[v], r.size());
  return out;
}

// Node v joins its modulated_k nearest neighbors; union symmetrization.
// `order` is the per-node neighbor ordering from neighbor_orders(D).
inline WeightedGraph rmd_similarity_graph(const DistanceMatrix& D, const std::vector<std::vector<NodeId>>& order,
                                          const RankVector& r, const ModulationSpec& spec, Weighting weights) {
  if (r.size() != D.n) throw DimensionError("rank vector and features disagree on n");
  check_k(spec.k, D.n);
  return select_neighbors_graph(D, order, modulated_degrees(r, spec), weights);
}

inline WeightedGraph rmd_similarity_graph(const FeatureMatrix& f, const RankVector& r, const ModulationSpec& spec,
                                          Weighting weights = Weighting::unit()) {
  const auto D = pairwise_distances(f);
  return rmd_similarity_graph(D, neighbor_orders(D), r, spec, weights);
}

// Retained-degree targets round(d(v) (lambda + (1 - lambda) R(v))) in [1, d(v)];
// isolated nodes keep 0.
inline std::vector<std::size_t> connectivity_targets(const WeightedGraph& g, const RankVector& r, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in [0,1]");
  if (r.size() != g.n()) throw DimensionError("rank vector and graph disagree on n");
  std::vector<std::size_t> t(g.n(), 0);
  for (NodeId v = 0; v < g.n(); ++v) {
    const std::size_t d = g.degree_count(v);
    if (d == 0) continue;
    const double raw = static_cast<double>(d) * (lambda + (1.0 - lambda) * r[v]);
    t[v] = static_cast<std::size_t>(std::clamp<long long>(std::llround(raw), 1, static_cast<long long>(d)));
  }
  return t;
}

// Each node marks its d(v) - t(v) incident edges with the fewest common
// neighbors (ties: lower neighbor id). Counts come from the original graph.
// An edge is dropped when either endpoint marks it. Surviving weights are kept.
inline WeightedGraph rmd_connectivity_graph(const WeightedGraph& g, const RankVector& r, double lambda,
                                            const std::vector<std::vector<std::size_t>>& common) {
  const auto targets = connectivity_targets(g, r, lambda);
  std::vector<std::vector<bool>> marked(g.n());
  std::vector<std::size_t> idx;
  for (NodeId v = 0; v < g.n(); ++v) {
    const auto nbrs = g.neighbors(v);
    marked[v].assign(nbrs.size(), false);
    const std::size_t drop = nbrs.size() - targets[v];
    if (drop == 0) continue;
    idx.resize(nbrs.size());
    std::iota(idx.begin(), idx.end(), 0);
    // adjacency is sorted by id, so a stable sort on the count breaks ties by lower id
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return common[v][a] < common[v][b]; });
    for (std::size_t i = 0; i < drop; ++i) marked[v][idx[i]] = true;
  }
  std::vector<Edge> kept;
  for (NodeId v = 0; v < g.n(); ++v) {
    const auto nbrs = g.neighbors(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const NodeId w = nbrs[i].id;
      if (w <= v) continue;
      if (marked[v][i]) continue;
      const auto nw = g.neighbors(w);
      auto it = std::lower_bound(nw.begin(), nw.end(), v, [](const Neighbor& a, NodeId id) { return a.id < id; });
      if (marked[w][static_cast<std::size_t>(it - nw.begin())]) continue;
      kept.push_back({v, w, nbrs[i].w});
    }
  }
  return WeightedGraph(g.n(), kept);
}

inline WeightedGraph rmd_connectivity_graph(const WeightedGraph& g, const RankVector& r, double lambda) {
  return rmd_connectivity_graph(g, r, lambda, common_neighbor_counts(g));
}

}  // namespace pcut
