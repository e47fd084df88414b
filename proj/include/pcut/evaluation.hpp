#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "error.hpp"
#include "graph.hpp"

namespace pcut {

using CostMatrix = std::vector<std::vector<double>>;

namespace detail {

// O(n^3) shortest-augmenting-path assignment on a square matrix.
// Returns the column assigned to each row.
inline std::vector<std::size_t> solve_assignment(const CostMatrix& a) {
  const std::size_t n = a.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

inline double assignment_cost(const CostMatrix& a, const std::vector<std::size_t>& cols) {
  double s = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i) s += a[i][cols[i]];
  return s;
}

}  // namespace detail

struct Assignment {
  // row i -> column; columns >= the original column count are padding.
  std::vector<std::size_t> row_to_col;
  double cost = 0.0;
};

// Minimum-cost perfect matching. Rectangular inputs are padded with zero-cost
// dummy rows/columns to a square matrix. Among optimal matchings the
// lexicographically smallest row-to-column vector is returned.
inline Assignment hungarian_match(const CostMatrix& cost) {
  const std::size_t rows = cost.size();
  std::size_t cols = 0;
  for (const auto& r : cost) cols = std::max(cols, r.size());
  for (const auto& r : cost) {
    if (r.size() != cols) throw DimensionError("cost matrix rows have different lengths");
    for (double c : r) {
      if (!std::isfinite(c)) throw InputError("cost matrix has non-finite entries");
    }
  }
  const std::size_t n = std::max(rows, cols);
  Assignment out;
  if (n == 0) return out;
  CostMatrix a(n, std::vector<double>(n, 0.0));
  double scale = 1.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      a[i][j] = cost[i][j];
      scale = std::max(scale, std::abs(cost[i][j]));
    }
  }
  const double tol = 1e-9 * scale * static_cast<double>(n);

  const double optimum = detail::assignment_cost(a, detail::solve_assignment(a));

  // Fix rows one at a time to the smallest column that keeps the optimum
  // reachable: for row i and column j, solve the remaining rows with
  // column j forbidden for them and the already fixed columns removed.
  std::vector<std::size_t> fixed;
  std::vector<bool> col_used(n, false);
  double fixed_cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (col_used[j]) continue;
      std::vector<std::size_t> free_cols;
      for (std::size_t c = 0; c < n; ++c) {
        if (!col_used[c] && c != j) free_cols.push_back(c);
      }
      const std::size_t m = free_cols.size();
      double rest = 0.0;
      if (m > 0) {
        CostMatrix sub(m, std::vector<double>(m));
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t c = 0; c < m; ++c) sub[r][c] = a[i + 1 + r][free_cols[c]];
        }
        rest = detail::assignment_cost(sub, detail::solve_assignment(sub));
      }
      if (fixed_cost + a[i][j] + rest <= optimum + tol) {
        fixed.push_back(j);
        col_used[j] = true;
        fixed_cost += a[i][j];
        break;
      }
    }
  }
  out.row_to_col.assign(fixed.begin(), fixed.begin() + static_cast<std::ptrdiff_t>(rows));
  out.cost = fixed_cost;
  return out;
}

struct ErrorReport {
  double error_rate = 0.0;
  std::size_t errors = 0;
  // found cluster -> truth cluster, or truth.K when matched to a dummy
  std::vector<std::size_t> matching;
  // confusion[i][j] = |found_i ∩ truth_j|
  std::vector<std::vector<std::size_t>> confusion;
};

// Misassigned fraction under the optimal cluster matching with cost
// |C_i ∪ T_j| - |C_i ∩ T_j|. Unequal cluster counts are padded with empty
// dummy clusters, so every node of an unmatched cluster counts as an error.
inline ErrorReport clustering_error(const Partition& found, const Partition& truth) {
  if (found.n() != truth.n()) throw DimensionError("partitions cover different node counts");
  const std::size_t n = found.n();
  ErrorReport rep;
  rep.confusion.assign(found.K, std::vector<std::size_t>(truth.K, 0));
  for (std::size_t v = 0; v < n; ++v) ++rep.confusion[found.labels[v]][truth.labels[v]];
  const auto fs = found.sizes();
  const auto ts = truth.sizes();

  const std::size_t m = std::max(found.K, truth.K);
  CostMatrix cost(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double a = i < found.K ? static_cast<double>(fs[i]) : 0.0;
      const double b = j < truth.K ? static_cast<double>(ts[j]) : 0.0;
      const double both = (i < found.K && j < truth.K) ? static_cast<double>(rep.confusion[i][j]) : 0.0;
      cost[i][j] = (a + b - both) - both;
    }
  }
  const auto match = hungarian_match(cost);
  std::size_t correct = 0;
  rep.matching.assign(found.K, truth.K);
  for (std::size_t i = 0; i < found.K; ++i) {
    const std::size_t j = match.row_to_col[i];
    if (j < truth.K) {
      rep.matching[i] = j;
      correct += rep.confusion[i][j];
    }
  }
  rep.errors = n - correct;
  rep.error_rate = n ? static_cast<double>(rep.errors) / static_cast<double>(n) : 0.0;
  return rep;
}

}  // namespace pcut
