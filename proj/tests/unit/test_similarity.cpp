#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pcut/similarity.hpp"

using namespace pcut;

namespace {

FeatureMatrix line(std::vector<double> xs) {
  std::vector<std::vector<double>> rows;
  for (double x : xs) rows.push_back({x});
  return FeatureMatrix::from_rows(rows);
}

FeatureMatrix random_points(std::mt19937_64& gen, std::size_t n, std::size_t d) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(n * d);
  for (auto& v : x) v = z(gen);
  return FeatureMatrix(n, d, x);
}

}  // namespace

TEST(FeatureMatrix, RejectsNonFiniteAndTooFewRows) {
  EXPECT_THROW(FeatureMatrix(1, 1, {0.0}), InputError);
  EXPECT_THROW(FeatureMatrix(2, 1, {0.0, NAN}), InputError);
  EXPECT_THROW(FeatureMatrix(2, 2, {0.0, 1.0, 2.0}), DimensionError);
}

TEST(FeatureCsv, SkipsHeaderAndReportsBadLines) {
  const auto f = parse_feature_csv("x,y\n0,0\n3,4\n");
  EXPECT_EQ(f.n(), 2u);
  EXPECT_EQ(f.d(), 2u);
  try {
    parse_feature_csv("0,0\n1,oops\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_feature_csv("0,0\n1\n"), InputError);
  const auto again = parse_feature_csv(format_feature_csv(f));
  EXPECT_EQ(again.values(), f.values());
}

TEST(PairwiseDistances, HandExamples) {
  const auto D = pairwise_distances(FeatureMatrix::from_rows({{0, 0}, {3, 4}, {0, 0}}));
  EXPECT_DOUBLE_EQ(D(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(D(0, 2), 0.0);
  std::mt19937_64 gen(3);
  const auto R = pairwise_distances(random_points(gen, 20, 3));
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(R(i, i), 0.0);
    for (std::size_t j = 0; j < 20; ++j) EXPECT_EQ(R(i, j), R(j, i));
  }
}

TEST(KnnGraph, TwoPointsGiveOneUnitEdge) {
  const auto g = knn_graph(line({0, 1}), 1);
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_DOUBLE_EQ(g.weight(0, 1), 1.0);
}

TEST(KnnGraph, CollinearExampleUsesUnionSymmetrization) {
  const auto g = knn_graph(line({0, 1, 2, 10}), 1);
  EXPECT_EQ(g.num_edges(), 3u);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_TRUE(g.has_edge(1, 2));
  EXPECT_TRUE(g.has_edge(2, 3));
  EXPECT_EQ(g.degree_count(2), 2u);
}

TEST(KnnGraph, RejectsKOutOfRange) {
  EXPECT_THROW(knn_graph(line({0, 1, 2}), 3), ParameterError);
  EXPECT_THROW(knn_graph(line({0, 1, 2}), 0), ParameterError);
}

TEST(KnnGraph, ContainsEachNodesKNearestNeighbors) {
  std::mt19937_64 gen(17);
  for (int t = 0; t < 10; ++t) {
    const auto f = random_points(gen, 30, 2);
    const auto D = pairwise_distances(f);
    for (std::size_t k : {1u, 3u, 7u}) {
      const auto g = knn_graph(f, k);
      for (NodeId v = 0; v < 30; ++v) {
        // brute force: count points strictly closer than each neighbor
        std::size_t included = 0;
        for (NodeId u = 0; u < 30; ++u) {
          if (u == v) continue;
          std::size_t closer = 0;
          for (NodeId w = 0; w < 30; ++w) {
            if (w != v && w != u && D(v, w) < D(v, u)) ++closer;
          }
          if (closer < k) {
            EXPECT_TRUE(g.has_edge(u, v));
            ++included;
          }
        }
        EXPECT_GE(included, k);
        EXPECT_GE(g.degree_count(v), k);
      }
    }
  }
}

TEST(RbfWeights, UnitAtZeroAndDecreasing) {
  const auto w = Weighting::rbf(0.7);
  EXPECT_DOUBLE_EQ(w(0.0), 1.0);
  double prev = 1.0;
  for (double d = 0.1; d < 5.0; d += 0.1) {
    EXPECT_LE(w(d), prev);
    EXPECT_GT(w(d), 0.0);
    prev = w(d);
  }
  EXPECT_THROW(Weighting::rbf(0.0), ParameterError);
  const auto g = knn_graph(line({0, 0.5, 3}), 1, Weighting::rbf(1.0));
  EXPECT_DOUBLE_EQ(g.weight(0, 1), std::exp(-0.125));
}

TEST(EpsilonGraph, HandExamplesAndNesting) {
  const auto f = line({0, 1, 3});
  const auto g = epsilon_graph(f, 1.5);
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_EQ(epsilon_graph(f, 0.5).num_edges(), 0u);
  EXPECT_EQ(epsilon_graph(f, 3.0).num_edges(), 3u);
  std::mt19937_64 gen(4);
  const auto r = random_points(gen, 25, 2);
  for (double e = 0.2; e < 3.0; e += 0.2) {
    const auto small = epsilon_graph(r, e), big = epsilon_graph(r, e + 0.2);
    for (const auto& ed : small.edges()) EXPECT_TRUE(big.has_edge(ed.u, ed.v));
  }
}

TEST(FullRbfGraph, WeightsFromFormula) {
  const double s = 0.8;
  const auto g = full_rbf_graph(FeatureMatrix::from_rows({{0, 0}, {0, s * std::sqrt(2.0)}, {0, 0}}), s);
  EXPECT_EQ(g.num_edges(), 3u);
  EXPECT_NEAR(g.weight(0, 1), std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(g.weight(0, 2), 1.0);
}

TEST(AvgKnnDistance, HandExamples) {
  EXPECT_DOUBLE_EQ(avg_knn_distance(line({0, 2}), 1), 2.0);
  EXPECT_DOUBLE_EQ(avg_knn_distance(line({0, 1, 3}), 1), 4.0 / 3.0);
  const double s = 1.7;
  const auto tri = FeatureMatrix::from_rows({{0, 0}, {s, 0}, {s / 2, s * std::sqrt(3.0) / 2}});
  EXPECT_NEAR(avg_knn_distance(tri, 1), s, 1e-12);
}

TEST(BaselineGraph, NeighborCountsFollowSampleSize) {
  std::mt19937_64 gen(9);
  EXPECT_EQ(construction_k0(100), 10u);
  EXPECT_EQ(construction_k0(900), 30u);
  const auto f = random_points(gen, 40, 2);
  const auto b = baseline_graph(f);
  EXPECT_EQ(b.construction_k, 6u);
  EXPECT_EQ(b.selection_k, 30u);
  EXPECT_DOUBLE_EQ(b.selection_sigma, avg_knn_distance(f, 30));
  for (NodeId v = 0; v < 40; ++v) EXPECT_GE(b.selection.degree_count(v), 30u);
  EXPECT_TRUE(b.construction == knn_graph(f, 6));
  EXPECT_THROW(baseline_graph(line({0, 1, 2})), ParameterError);
}
