#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "pcut/ranking.hpp"
#include "pcut/rmd.hpp"
#include "pcut/similarity.hpp"

using namespace pcut;

namespace {

FeatureMatrix two_gaussians(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const bool small = i % 4 == 0;
    rows.push_back({(small ? 5.0 : 0.0) + z(gen), z(gen)});
  }
  return FeatureMatrix::from_rows(rows);
}

WeightedGraph random_graph(std::mt19937_64& gen, std::size_t n, double p) {
  std::bernoulli_distribution coin(p);
  std::uniform_real_distribution<double> w(0.5, 2.0);
  std::vector<Edge> es;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (coin(gen)) es.push_back({u, v, w(gen)});
    }
  }
  return WeightedGraph(n, es);
}

// Straight re-implementation of the sparsification rule with std::set.
std::set<std::pair<NodeId, NodeId>> removed_oracle(const WeightedGraph& g, const RankVector& r, double lambda) {
  std::set<std::pair<NodeId, NodeId>> removed;
  for (NodeId v = 0; v < g.n(); ++v) {
    const std::size_t d = g.degree_count(v);
    if (d == 0) continue;
    long long t = std::llround(static_cast<double>(d) * (lambda + (1.0 - lambda) * r[v]));
    t = std::clamp<long long>(t, 1, static_cast<long long>(d));
    std::set<NodeId> nv;
    for (const auto& nb : g.neighbors(v)) nv.insert(nb.id);
    std::vector<std::pair<std::size_t, NodeId>> keyed;
    for (NodeId w : nv) {
      std::size_t s = 0;
      for (const auto& nb : g.neighbors(w)) s += nv.count(nb.id);
      keyed.push_back({s, w});
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 0; i < d - static_cast<std::size_t>(t); ++i) {
      removed.insert({std::min(v, keyed[i].second), std::max(v, keyed[i].second)});
    }
  }
  return removed;
}

}  // namespace

TEST(ModulatedK, FormulaExamples) {
  for (double r : {0.01, 0.3, 1.0}) EXPECT_EQ(modulated_k(30, 1.0, r, 100), 30u);
  for (double l : {0.0, 0.4, 0.9}) EXPECT_EQ(modulated_k(30, l, 0.5, 100), 30u);
  EXPECT_EQ(modulated_k(20, 0.5, 1.0, 100), 30u);
  EXPECT_EQ(modulated_k(20, 0.5, 1e-9, 100), 10u);
  EXPECT_EQ(modulated_k(1, 0.0, 0.01, 100), 1u);   // clamped up
  EXPECT_EQ(modulated_k(30, 0.0, 1.0, 40), 39u);   // clamped to n-1
  EXPECT_THROW(modulated_k(5, 1.5, 0.5, 10), ParameterError);
}

TEST(RmdSimilarity, LambdaOneOrHalfRanksReproduceKnnGraph) {
  const auto f = two_gaussians(1, 120);
  const auto D = pairwise_distances(f);
  const auto order = neighbor_orders(D);
  const auto r = rank(eta_similarity(D, knn_graph(D, construction_k0(f.n()))));
  for (std::size_t k : {1u, 5u, 20u}) {
    for (auto w : {Weighting::unit(), Weighting::rbf(0.7)}) {
      EXPECT_TRUE(rmd_similarity_graph(D, order, r, {1.0, k}, w) == knn_graph(D, k, w));
      RankVector half{std::vector<double>(f.n(), 0.5)};
      EXPECT_TRUE(rmd_similarity_graph(D, order, half, {0.3, k}, w) == knn_graph(D, k, w));
    }
  }
}

TEST(RmdSimilarity, LowRankNodesSelectFewerNeighbors) {
  const auto f = two_gaussians(3, 200);
  const auto r = rank(eta_similarity(f, knn_graph(f, construction_k0(f.n()))));
  const auto ks = modulated_degrees(r, {0.5, 10});
  std::size_t max_low = 0, min_high = 1000;
  for (std::size_t v = 0; v < f.n(); ++v) {
    if (r[v] < 0.45) max_low = std::max(max_low, ks[v]);
    if (r[v] > 0.55) min_high = std::min(min_high, ks[v]);
    for (std::size_t u = 0; u < f.n(); ++u) {
      if (r[u] < r[v]) EXPECT_LE(ks[u], ks[v]);
    }
  }
  EXPECT_LT(max_low, min_high);
  // every node keeps at least its own selections
  const auto g = rmd_similarity_graph(f, r, {0.0, 10});
  for (std::size_t v = 0; v < f.n(); ++v) {
    EXPECT_GE(g.degree_count(v), std::max<std::size_t>(1, modulated_k(10, 0.0, r[v], f.n())));
  }
}

TEST(RmdConnectivity, LambdaOneLeavesGraphUnchanged) {
  std::mt19937_64 gen(4);
  const auto g = random_graph(gen, 40, 0.2);
  const auto r = rank(eta_connectivity(g));
  EXPECT_TRUE(rmd_connectivity_graph(g, r, 1.0) == g);
}

TEST(RmdConnectivity, TopRankedNodeMarksNothing) {
  std::mt19937_64 gen(5);
  const auto g = random_graph(gen, 30, 0.3);
  RankVector r{std::vector<double>(30, 0.2)};
  r.r[7] = 1.0;
  const auto t = connectivity_targets(g, r, 0.0);
  EXPECT_EQ(t[7], g.degree_count(7));
}

TEST(RmdConnectivity, BridgeBetweenCliquesIsRemovedWhenAnEndpointDrops) {
  std::vector<Edge> es;
  for (NodeId u = 0; u < 4; ++u) {
    for (NodeId v = u + 1; v < 4; ++v) {
      es.push_back({u, v, 1.0});
      es.push_back({u + 4, v + 4, 1.0});
    }
  }
  es.push_back({3, 4, 1.0});
  WeightedGraph g(8, es);
  const auto r = rank(eta_connectivity(g));
  const auto t = connectivity_targets(g, r, 0.5);
  const bool drops = t[3] < 4 || t[4] < 4;
  const auto h = rmd_connectivity_graph(g, r, 0.5);
  EXPECT_TRUE(drops);
  EXPECT_FALSE(h.has_edge(3, 4));
  // the bridge is the only edge with zero common neighbors
  const auto s = common_neighbor_counts(g);
  EXPECT_EQ(s[3].back(), 0u);
}

TEST(RmdConnectivity, MatchesSetBasedOracle) {
  std::mt19937_64 gen(12);
  for (int t = 0; t < 20; ++t) {
    const auto g = random_graph(gen, 35, 0.15 + 0.02 * t);
    const auto r = rank(eta_connectivity(g));
    for (double lambda : {0.0, 0.5, 0.725, 0.9}) {
      const auto h = rmd_connectivity_graph(g, r, lambda);
      const auto removed = removed_oracle(g, r, lambda);
      EXPECT_EQ(h.num_edges() + removed.size(), g.num_edges());
      for (const auto& e : g.edges()) {
        const bool gone = removed.count({e.u, e.v}) > 0;
        EXPECT_EQ(h.has_edge(e.u, e.v), !gone);
        if (!gone) EXPECT_EQ(h.weight(e.u, e.v), e.w);
      }
      const auto targets = connectivity_targets(g, r, lambda);
      for (NodeId v = 0; v < g.n(); ++v) EXPECT_LE(h.degree_count(v), targets[v]);
    }
  }
}

TEST(RmdConnectivity, RemovedSetsAreNestedAcrossLambda) {
  std::mt19937_64 gen(13);
  for (int t = 0; t < 10; ++t) {
    const auto g = random_graph(gen, 40, 0.25);
    const auto r = rank(eta_connectivity(g));
    WeightedGraph prev = rmd_connectivity_graph(g, r, 0.0);
    for (int i = 1; i <= 20; ++i) {
      const auto cur = rmd_connectivity_graph(g, r, i / 20.0);
      for (const auto& e : prev.edges()) EXPECT_TRUE(cur.has_edge(e.u, e.v));
      prev = cur;
    }
  }
}

TEST(RmdConnectivity, TargetsIncreaseWithRank) {
  std::mt19937_64 gen(14);
  const auto g = random_graph(gen, 50, 0.3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  RankVector r{std::vector<double>(50)};
  for (auto& x : r.r) x = u(gen);
  const auto t = connectivity_targets(g, r, 0.3);
  for (NodeId a = 0; a < 50; ++a) {
    for (NodeId b = 0; b < 50; ++b) {
      if (g.degree_count(a) == g.degree_count(b) && r[a] < r[b]) EXPECT_LE(t[a], t[b]);
    }
  }
}
