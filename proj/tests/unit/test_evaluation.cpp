#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "pcut/evaluation.hpp"

using namespace pcut;

namespace {

// First optimal permutation in lexicographic order.
std::pair<std::vector<std::size_t>, double> brute_force(const CostMatrix& c) {
  std::vector<std::size_t> perm(c.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += c[i][perm[i]];
    if (s < best_cost) {
      best_cost = s;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best, best_cost};
}

// n minus the largest total overlap over injective cluster matchings.
std::size_t error_oracle(const Partition& f, const Partition& t) {
  const std::size_t m = std::max(f.K, t.K);
  std::vector<std::vector<std::size_t>> overlap(m, std::vector<std::size_t>(m, 0));
  for (std::size_t v = 0; v < f.n(); ++v) ++overlap[f.labels[v]][t.labels[v]];
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t s = 0;
    for (std::size_t i = 0; i < m; ++i) s += overlap[i][perm[i]];
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return f.n() - best;
}

Partition random_partition(std::mt19937_64& gen, std::size_t n, std::size_t K) {
  std::uniform_int_distribution<std::size_t> pick(0, K - 1);
  std::vector<std::size_t> l(n);
  for (auto& x : l) x = pick(gen);
  return Partition(l, K);
}

}  // namespace

TEST(Hungarian, SmallHandExamples) {
  const auto id = hungarian_match({{0, 5, 5}, {5, 0, 5}, {5, 5, 0}});
  EXPECT_EQ(id.row_to_col, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(id.cost, 0.0);
  const auto anti = hungarian_match({{1, 0}, {0, 1}});
  EXPECT_EQ(anti.row_to_col, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(anti.cost, 0.0);
}

TEST(Hungarian, EqualsExhaustivePermutationsIncludingTieBreak) {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> val(0, 6);  // small range forces ties
  for (int t = 0; t < 200; ++t) {
    const std::size_t K = 1 + static_cast<std::size_t>(t % 5);
    CostMatrix c(K, std::vector<double>(K));
    for (auto& row : c) {
      for (auto& x : row) x = val(gen);
    }
    const auto [perm, cost] = brute_force(c);
    const auto a = hungarian_match(c);
    EXPECT_EQ(a.cost, cost);
    EXPECT_EQ(a.row_to_col, perm);
  }
}

TEST(Hungarian, RectangularInputsArePaddedWithZeroCost) {
  const auto a = hungarian_match({{3, 1, 2}, {1, 5, 4}});
  EXPECT_EQ(a.cost, 2.0);
  EXPECT_EQ(a.row_to_col, (std::vector<std::size_t>{1, 0}));
  const auto b = hungarian_match({{4}, {2}, {7}});
  EXPECT_EQ(b.cost, 2.0);
  EXPECT_EQ(b.row_to_col[1], 0u);
  EXPECT_THROW(hungarian_match({{1, 2}, {3}}), DimensionError);
}

TEST(ClusteringError, IdentityAndRelabeling) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_partition(gen, 40, 4);
    EXPECT_EQ(clustering_error(p, p).error_rate, 0.0);
    std::vector<std::size_t> perm{3, 1, 0, 2}, relabeled;
    for (auto l : p.labels) relabeled.push_back(perm[l]);
    EXPECT_EQ(clustering_error(Partition(relabeled, 4), p).error_rate, 0.0);
    EXPECT_EQ(clustering_error(p, Partition(relabeled, 4)).errors, 0u);
  }
}

TEST(ClusteringError, SingleMisattributedNodeOnThirtyFour) {
  std::vector<std::size_t> truth(34, 1);
  for (std::size_t v : {0, 1, 2, 3, 4, 5, 6, 7, 10, 11, 12, 13, 16, 17, 19, 21}) truth[v] = 0;
  auto found = truth;
  found[2] = 1;
  for (auto& l : found) l = 1 - l;  // also relabel
  const auto rep = clustering_error(Partition(found, 2), Partition(truth, 2));
  EXPECT_EQ(rep.errors, 1u);
  EXPECT_DOUBLE_EQ(rep.error_rate, 1.0 / 34.0);
  EXPECT_EQ(rep.matching, (std::vector<std::size_t>{1, 0}));
}

TEST(ClusteringError, MatchesBruteForceAndIsSymmetric) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<std::size_t> kk(1, 6);
  for (int t = 0; t < 200; ++t) {
    const std::size_t K1 = kk(gen), K2 = kk(gen);
    const auto f = random_partition(gen, 30, K1);
    const auto tr = random_partition(gen, 30, K2);
    const auto rep = clustering_error(f, tr);
    EXPECT_EQ(rep.errors, error_oracle(f, tr));
    EXPECT_GE(rep.error_rate, 0.0);
    EXPECT_LE(rep.error_rate, 1.0);
    if (K1 == K2) EXPECT_EQ(rep.errors, clustering_error(tr, f).errors);
  }
}

TEST(ClusteringError, UnmatchedClustersCountAsErrors) {
  // found splits a truth cluster into three parts; the two smaller parts have no partner
  Partition found({0, 0, 0, 1, 2, 3, 3, 3}, 4);
  Partition truth({0, 0, 0, 0, 0, 1, 1, 1}, 2);
  const auto rep = clustering_error(found, truth);
  EXPECT_EQ(rep.errors, 2u);
  EXPECT_EQ(rep.matching[1], 2u);  // dummy
  EXPECT_THROW(clustering_error(found, Partition({0, 1}, 2)), DimensionError);
}
