#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <random>

#include "pcut/graph.hpp"
#include "pcut/spectral.hpp"

using namespace pcut;

namespace {

WeightedGraph cliques(std::vector<std::size_t> sizes, double noise_p = 0.0, std::uint64_t seed = 0) {
  std::vector<Edge> es;
  std::vector<std::size_t> block;
  for (std::size_t b = 0; b < sizes.size(); ++b) block.insert(block.end(), sizes[b], b);
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution coin(noise_p);
  for (NodeId u = 0; u < block.size(); ++u) {
    for (NodeId v = u + 1; v < block.size(); ++v) {
      if (block[u] == block[v] || coin(gen)) es.push_back({u, v, 1.0});
    }
  }
  return WeightedGraph(block.size(), es);
}

WeightedGraph random_graph(std::mt19937_64& gen, std::size_t n, double p) {
  std::bernoulli_distribution coin(p);
  std::uniform_real_distribution<double> w(0.1, 3.0);
  std::vector<Edge> es;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (coin(gen)) es.push_back({u, v, w(gen)});
    }
  }
  return WeightedGraph(n, es);
}

bool same_grouping(const Partition& a, const Partition& b) {
  if (a.n() != b.n()) return false;
  for (std::size_t i = 0; i < a.n(); ++i) {
    for (std::size_t j = 0; j < a.n(); ++j) {
      if ((a.labels[i] == a.labels[j]) != (b.labels[i] == b.labels[j])) return false;
    }
  }
  return true;
}

double residual(const Eigen::MatrixXd& m, const EigenPairs& ep) {
  double r = 0.0;
  for (Eigen::Index j = 0; j < ep.values.size(); ++j) {
    r = std::max(r, (m * ep.vectors.col(j) - ep.values(j) * ep.vectors.col(j)).norm());
  }
  return r;
}

}  // namespace

TEST(Laplacian, HandExamples) {
  EXPECT_TRUE(laplacian(WeightedGraph(3, std::vector<Edge>{}), LaplacianVariant::rcut_unnormalized).isZero());
  const auto L = laplacian(cliques({3}), LaplacianVariant::rcut_unnormalized);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(L(i, j), i == j ? 2.0 : -1.0);
  }
  WeightedGraph iso(3, std::vector<Edge>{{0, 1, 2.0}});
  const auto N = laplacian(iso, LaplacianVariant::ncut_normalized);
  EXPECT_DOUBLE_EQ(N(2, 2), 0.0);
  EXPECT_DOUBLE_EQ(N(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(N(0, 1), -1.0);
}

TEST(Laplacian, RowSumsAndNormalizedFormula) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 10; ++t) {
    const auto g = random_graph(gen, 15, 0.4);
    const auto L = laplacian(g, LaplacianVariant::rcut_unnormalized);
    for (int i = 0; i < 15; ++i) EXPECT_NEAR(L.row(i).sum(), 0.0, 1e-12);
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(15, 15);
    for (const auto& e : g.edges()) W(e.u, e.v) = W(e.v, e.u) = e.w;
    Eigen::VectorXd d = W.rowwise().sum();
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Identity(15, 15);
    for (int i = 0; i < 15; ++i) {
      for (int j = 0; j < 15; ++j) {
        if (d(i) > 0 && d(j) > 0) oracle(i, j) -= W(i, j) / std::sqrt(d(i) * d(j));
      }
      if (d(i) == 0) oracle(i, i) = 0.0;
    }
    EXPECT_LT((laplacian(g, LaplacianVariant::ncut_normalized) - oracle).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SmallestEigenvectors, IdentityAndConnectedLaplacian) {
  const auto id = smallest_eigenvectors(Eigen::MatrixXd::Identity(5, 5), 2);
  EXPECT_NEAR(id.values(0), 1.0, 1e-12);
  EXPECT_NEAR(id.values(1), 1.0, 1e-12);
  EXPECT_LT((id.vectors.transpose() * id.vectors - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-10);

  const auto L = laplacian(cliques({6}, 0.0), LaplacianVariant::rcut_unnormalized);
  std::mt19937_64 gen(2);
  const auto g = random_graph(gen, 30, 0.3);
  ASSERT_EQ(connected_components(g).K, 1u);
  const auto Lg = laplacian(g, LaplacianVariant::rcut_unnormalized);
  const auto ep = smallest_eigenvectors(Lg, 3);
  EXPECT_NEAR(ep.values(0), 0.0, 1e-10);
  const double c = 1.0 / std::sqrt(30.0);
  for (int i = 0; i < 30; ++i) EXPECT_NEAR(ep.vectors(i, 0), c, 1e-9);  // sign convention makes it positive
  EXPECT_GT(ep.values(1), 1e-6);
  EXPECT_TRUE(L.isApprox(L.transpose()));
}

TEST(SmallestEigenvectors, ZeroMultiplicityEqualsComponentCount) {
  for (std::size_t c : {2u, 3u}) {
    std::vector<std::size_t> sizes(c, 5);
    sizes[0] = 7;
    const auto g = cliques(sizes);
    for (auto variant : {LaplacianVariant::rcut_unnormalized, LaplacianVariant::ncut_normalized}) {
      const auto L = laplacian(g, variant);
      const auto ep = smallest_eigenvectors(L, c + 1);
      for (std::size_t j = 0; j < c; ++j) EXPECT_NEAR(ep.values(j), 0.0, 1e-10);
      EXPECT_GT(ep.values(c), 1e-3);
      EXPECT_LE(residual(L, ep), 1e-8 * L.norm());
      EXPECT_LT((ep.vectors.transpose() * ep.vectors - Eigen::MatrixXd::Identity(c + 1, c + 1)).norm(), 1e-9);
    }
  }
}

TEST(SmallestEigenvectors, AgreesWithReferenceSolverOnRandomMatrices) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int n : {2, 3, 10, 60, 150}) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = z(gen);
    }
    const Eigen::MatrixXd m = 0.5 * (a + a.transpose());
    const int K = std::min(n, 4);
    const auto ep = smallest_eigenvectors(m, static_cast<std::size_t>(K));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(m);
    for (int j = 0; j < K; ++j) EXPECT_NEAR(ep.values(j), ref.eigenvalues()(j), 1e-9 * m.norm());
    EXPECT_LE(residual(m, ep), 1e-8 * m.norm());
    for (int j = 0; j < K; ++j) {
      const auto col = ep.vectors.col(j);
      for (int i = 0; i < n; ++i) {
        if (std::abs(col(i)) > 1e-12) {
          EXPECT_GT(col(i), 0.0);
          break;
        }
      }
    }
  }
}

TEST(SmallestEigenvectors, LaplaciansArePositiveSemidefinite) {
  std::mt19937_64 gen(4);
  for (int t = 0; t < 10; ++t) {
    const auto g = random_graph(gen, 40, 0.1);
    for (auto variant : {LaplacianVariant::rcut_unnormalized, LaplacianVariant::ncut_normalized}) {
      const auto ep = smallest_eigenvectors(laplacian(g, variant), 5);
      for (int j = 0; j < 5; ++j) EXPECT_GE(ep.values(j), -1e-9);
    }
  }
}

TEST(SmallestEigenvectors, RejectsNonSymmetricInput) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(0, 1) = 1e-3;
  EXPECT_THROW(smallest_eigenvectors(m, 1), InputError);
  EXPECT_THROW(smallest_eigenvectors(Eigen::MatrixXd::Identity(3, 3), 4), ParameterError);
}

TEST(KMeans, OnePointPerClusterHasZeroCost) {
  Eigen::MatrixXd pts(4, 2);
  pts << 0, 0, 1, 0, 5, 5, 2, 7;
  const auto r = kmeans(pts, 4, 3, 100, 1);
  EXPECT_DOUBLE_EQ(r.wcss, 0.0);
  EXPECT_EQ(r.partition.labels, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(KMeans, MatchesBruteForceBestBipartition) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const int n = 9;
    Eigen::MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) pts.row(i) << z(gen) + (i < 4 ? 4.0 : 0.0), z(gen);
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      double cost = 0.0;
      for (int side = 0; side < 2; ++side) {
        Eigen::RowVector2d mean = Eigen::RowVector2d::Zero();
        int cnt = 0;
        for (int i = 0; i < n; ++i) {
          if (((mask >> i) & 1u) == static_cast<unsigned>(side)) {
            mean += pts.row(i);
            ++cnt;
          }
        }
        mean /= cnt;
        for (int i = 0; i < n; ++i) {
          if (((mask >> i) & 1u) == static_cast<unsigned>(side)) cost += (pts.row(i) - mean).squaredNorm();
        }
      }
      best = std::min(best, cost);
    }
    EXPECT_NEAR(kmeans(pts, 2, 10, 100, static_cast<std::uint64_t>(t)).wcss, best, 1e-9);
  }
}

TEST(KMeans, SeparatedPairsAndDuplicatedData) {
  Eigen::MatrixXd pts(4, 2);
  pts << 0, 0, 0.1, 0, 10, 10, 10, 10.2;
  const auto r = kmeans(pts, 2, 5, 100, 9);
  EXPECT_EQ(r.partition.labels, (std::vector<std::size_t>{0, 0, 1, 1}));

  std::mt19937_64 gen(6);
  std::normal_distribution<double> z(0.0, 0.3);
  Eigen::MatrixXd base(30, 2);
  for (int i = 0; i < 30; ++i) base.row(i) << z(gen) + 3.0 * (i % 3), z(gen) + (i % 3 == 1 ? 4.0 : 0.0);
  Eigen::MatrixXd twice(60, 2);
  twice << base, base;
  const auto a = kmeans(base, 3, 10, 100, 1).partition;
  const auto b = kmeans(twice, 3, 10, 100, 1).partition;
  Partition first_half(std::vector<std::size_t>(b.labels.begin(), b.labels.begin() + 30), 3);
  EXPECT_TRUE(same_grouping(a, first_half));
  for (int i = 0; i < 30; ++i) EXPECT_EQ(b.labels[i], b.labels[i + 30]);
}

TEST(KMeans, DeterministicGivenSeed) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd pts(50, 3);
  for (int i = 0; i < 50; ++i) pts.row(i) << z(gen), z(gen), z(gen);
  const auto a = kmeans(pts, 4, 5, 100, 42), b = kmeans(pts, 4, 5, 100, 42);
  EXPECT_EQ(a.partition, b.partition);
  EXPECT_EQ(a.wcss, b.wcss);
}

TEST(SpectralClustering, RecoversDisjointCliques) {
  for (auto variant : {LaplacianVariant::rcut_unnormalized, LaplacianVariant::ncut_normalized}) {
    for (bool rows : {false, true}) {
      SpectralConfig cfg;
      cfg.variant = variant;
      cfg.normalize_rows = rows;
      const auto g2 = cliques({5, 5});
      auto p = spectral_clustering(g2, cfg);
      EXPECT_DOUBLE_EQ(cut_value(g2, p), 0.0);
      EXPECT_EQ(p.min_size(), 5u);
      cfg.K = 3;
      const auto g3 = cliques({4, 6, 5});
      p = spectral_clustering(g3, cfg);
      EXPECT_DOUBLE_EQ(cut_value(g3, p), 0.0);
      EXPECT_TRUE(same_grouping(p, connected_components(g3)));
    }
  }
}

TEST(SpectralClustering, PermutedInputGivesPermutedOutput) {
  const auto g = cliques({12, 20, 9}, 0.05, 8);
  std::vector<NodeId> perm(g.n());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 gen(9);
  std::shuffle(perm.begin(), perm.end(), gen);
  const auto h = g.induced(perm);  // node i of h is node perm[i] of g
  SpectralConfig cfg;
  cfg.K = 3;
  for (auto variant : {LaplacianVariant::rcut_unnormalized, LaplacianVariant::ncut_normalized}) {
    cfg.variant = variant;
    const auto pg = spectral_clustering(g, cfg);
    const auto ph = spectral_clustering(h, cfg);
    std::vector<std::size_t> pulled(g.n());
    for (std::size_t i = 0; i < g.n(); ++i) pulled[i] = pg.labels[perm[i]];
    EXPECT_TRUE(same_grouping(ph, Partition(pulled, 3)));
  }
}

TEST(SpectralClustering, WeightScalingDoesNotChangeAssignments) {
  const auto g = cliques({10, 14}, 0.15, 10);
  std::vector<Edge> scaled;
  for (const auto& e : g.edges()) scaled.push_back({e.u, e.v, 3.7 * e.w});
  const WeightedGraph h(g.n(), scaled);
  const auto Lg = laplacian(g, LaplacianVariant::ncut_normalized);
  const auto Lh = laplacian(h, LaplacianVariant::ncut_normalized);
  EXPECT_LT((Lg - Lh).cwiseAbs().maxCoeff(), 1e-12);
  SpectralConfig cfg;
  for (auto variant : {LaplacianVariant::rcut_unnormalized, LaplacianVariant::ncut_normalized}) {
    cfg.variant = variant;
    EXPECT_TRUE(same_grouping(spectral_clustering(g, cfg), spectral_clustering(h, cfg)));
  }
}

TEST(SpectralClustering, IsolatedNodesDoNotBreakTheEmbedding) {
  std::vector<Edge> es;
  const auto g = cliques({5, 5});
  for (const auto& e : g.edges()) es.push_back(e);
  const WeightedGraph h(11, es);  // node 10 isolated
  SpectralConfig cfg;
  cfg.K = 2;
  const auto p = spectral_clustering(h, cfg);
  EXPECT_EQ(p.n(), 11u);
  EXPECT_THROW(spectral_clustering(h, SpectralConfig{12}), ParameterError);
}
