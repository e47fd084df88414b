#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"

namespace pcut {

// n samples in R^d, row-major.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  FeatureMatrix(std::size_t n, std::size_t d, std::vector<double> values)
      : n_(n), d_(d), x_(std::move(values)) {
    if (x_.size() != n_ * d_) {
      throw DimensionError("feature buffer has " + std::to_string(x_.size()) + " values, expected " +
                           std::to_string(n_ * d_));
    }
    if (n_ < 2) throw InputError("need at least 2 samples, got " + std::to_string(n_));
    if (d_ < 1) throw InputError("feature dimension must be at least 1");
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i])) {
        throw InputError("non-finite feature at row " + std::to_string(i / d_) + ", column " +
                         std::to_string(i % d_));
      }
    }
  }

  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InputError("no samples");
    const std::size_t d = rows.front().size();
    std::vector<double> x;
    x.reserve(rows.size() * d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != d) throw DimensionError("row " + std::to_string(i) + " has wrong width");
      x.insert(x.end(), rows[i].begin(), rows[i].end());
    }
    return FeatureMatrix(rows.size(), d, std::move(x));
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  std::span<const double> row(std::size_t i) const { return {x_.data() + i * d_, d_}; }
  double operator()(std::size_t i, std::size_t j) const { return x_[i * d_ + j]; }
  const std::vector<double>& values() const noexcept { return x_; }

  FeatureMatrix select_rows(std::span<const std::size_t> idx) const {
    std::vector<double> x;
    x.reserve(idx.size() * d_);
    for (auto i : idx) {
      auto r = row(i);
      x.insert(x.end(), r.begin(), r.end());
    }
    return FeatureMatrix(idx.size(), d_, std::move(x));
  }

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> x_;
};

// Comma-separated reals, one sample per row. A first row that does not parse
// as numbers is treated as a header.
inline FeatureMatrix parse_feature_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool first_data = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
        vals.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric) {
      if (first_data && rows.empty()) {
        first_data = false;
        continue;  // header
      }
      throw InputError("line " + std::to_string(lineno) + ": non-numeric value '" + cell + "'");
    }
    first_data = false;
    if (!rows.empty() && vals.size() != rows.front().size()) {
      throw InputError("line " + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                       " columns, got " + std::to_string(vals.size()));
    }
    for (double v : vals) {
      if (!std::isfinite(v)) throw InputError("line " + std::to_string(lineno) + ": non-finite value");
    }
    rows.push_back(std::move(vals));
  }
  if (rows.size() < 2) throw InputError("feature file needs at least 2 samples");
  return FeatureMatrix::from_rows(rows);
}

inline std::string format_feature_csv(const FeatureMatrix& f) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < f.n(); ++i) {
    for (std::size_t j = 0; j < f.d(); ++j) {
      if (j) out << ',';
      out << f(i, j);
    }
    out << '\n';
  }
  return out.str();
}

// Dense symmetric n x n matrix stored row-major.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return std::sqrt(s);
}

inline DistanceMatrix pairwise_distances(const FeatureMatrix& f) {
  const std::size_t n = f.n();
  DistanceMatrix D{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean(f.row(i), f.row(j));
      if (!std::isfinite(d)) throw InputError("distance overflow between rows " + std::to_string(i) + " and " + std::to_string(j));
      D.values[i * n + j] = d;
      D.values[j * n + i] = d;
    }
  }
  return D;
}

// Edge weighting for similarity graphs. sigma <= 0 means unit weights.
struct Weighting {
  double sigma = 0.0;

  static Weighting unit() { return {0.0}; }
  static Weighting rbf(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ParameterError("RBF sigma must be positive");
    return {s};
  }
  bool is_rbf() const noexcept { return sigma > 0.0; }

  double operator()(double dist) const {
    if (!is_rbf()) return 1.0;
    const double w = std::exp(-dist * dist / (2.0 * sigma * sigma));
    // exp underflows to 0 for far pairs; keep the edge with the smallest positive weight.
    return w > 0.0 ? w : std::numeric_limits<double>::min();
  }
};

// Other nodes ordered by (distance, id).
inline std::vector<NodeId> neighbors_by_distance(const DistanceMatrix& D, NodeId v) {
  std::vector<NodeId> order;
  order.reserve(D.n - 1);
  for (NodeId u = 0; u < D.n; ++u) {
    if (u != v) order.push_back(u);
  }
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    const double da = D(v, a), db = D(v, b);
    return da < db || (da == db && a < b);
  });
  return order;
}

// Full neighbor orderings for every node; reused across k values.
inline std::vector<std::vector<NodeId>> neighbor_orders(const DistanceMatrix& D) {
  std::vector<std::vector<NodeId>> out(D.n);
  for (NodeId v = 0; v < D.n; ++v) out[v] = neighbors_by_distance(D, v);
  return out;
}

// Node v selects its first per_node[v] entries of order[v]; the selections are
// symmetrized by union and weighted by distance.
inline WeightedGraph select_neighbors_graph(const DistanceMatrix& D, const std::vector<std::vector<NodeId>>& order,
                                            std::span<const std::size_t> per_node, Weighting weights) {
  const std::size_t n = D.n;
  std::vector<std::vector<NodeId>> picked(n);
  for (NodeId v = 0; v < n; ++v) {
    const std::size_t k = std::min(per_node[v], order[v].size());
    for (std::size_t i = 0; i < k; ++i) {
      const NodeId u = order[v][i];
      picked[std::min(u, v)].push_back(std::max(u, v));
    }
  }
  std::vector<Edge> es;
  for (NodeId a = 0; a < n; ++a) {
    auto& row = picked[a];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    for (NodeId b : row) es.push_back({a, b, weights(D(a, b))});
  }
  return WeightedGraph(n, es);
}

inline void check_k(std::size_t k, std::size_t n) {
  if (k < 1 || k >= n) {
    throw ParameterError("k must satisfy 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
}

inline WeightedGraph knn_graph(const DistanceMatrix& D, std::size_t k, Weighting weights = Weighting::unit()) {
  check_k(k, D.n);
  const auto order = neighbor_orders(D);
  const std::vector<std::size_t> per_node(D.n, k);
  return select_neighbors_graph(D, order, per_node, weights);
}

inline WeightedGraph knn_graph(const FeatureMatrix& f, std::size_t k, Weighting weights = Weighting::unit()) {
  check_k(k, f.n());
  return knn_graph(pairwise_distances(f), k, weights);
}

inline WeightedGraph epsilon_graph(const FeatureMatrix& f, double eps, Weighting weights = Weighting::unit()) {
  if (!(eps > 0.0)) throw ParameterError("epsilon must be positive");
  const auto D = pairwise_distances(f);
  std::vector<Edge> es;
  for (NodeId i = 0; i < f.n(); ++i) {
    for (NodeId j = i + 1; j < f.n(); ++j) {
      if (D(i, j) <= eps) es.push_back({i, j, weights(D(i, j))});
    }
  }
  return WeightedGraph(f.n(), es);
}

inline WeightedGraph full_rbf_graph(const FeatureMatrix& f, double sigma) {
  const auto w = Weighting::rbf(sigma);
  const auto D = pairwise_distances(f);
  std::vector<Edge> es;
  for (NodeId i = 0; i < f.n(); ++i) {
    for (NodeId j = i + 1; j < f.n(); ++j) es.push_back({i, j, w(D(i, j))});
  }
  return WeightedGraph(f.n(), es);
}

// Mean distance from each node to its k-th nearest neighbor.
inline double avg_knn_distance(const DistanceMatrix& D, std::size_t k) {
  check_k(k, D.n);
  double s = 0.0;
  std::vector<double> row;
  for (NodeId v = 0; v < D.n; ++v) {
    row.clear();
    for (NodeId u = 0; u < D.n; ++u) {
      if (u != v) row.push_back(D(v, u));
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    s += row[k - 1];
  }
  return s / static_cast<double>(D.n);
}

inline double avg_knn_distance(const FeatureMatrix& f, std::size_t k) {
  check_k(k, f.n());
  return avg_knn_distance(pairwise_distances(f), k);
}

// The two reference graphs over a feature set.
struct BaselineGraphs {
  // round(sqrt(n))-NN, unit weights; used for ranking.
  WeightedGraph construction;
  std::size_t construction_k = 0;
  // min(30, n-1)-NN with RBF weights at the average k-NN distance; used to
  // compare candidate cuts.
  WeightedGraph selection;
  std::size_t selection_k = 0;
  double selection_sigma = 0.0;
};

inline std::size_t construction_k0(std::size_t n) {
  const auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

inline BaselineGraphs baseline_graph(const DistanceMatrix& D) {
  const std::size_t n = D.n;
  if (n < 4) throw ParameterError("baseline graph needs n >= 4");
  BaselineGraphs b;
  const auto order = neighbor_orders(D);
  b.construction_k = construction_k0(n);
  b.construction = select_neighbors_graph(D, order, std::vector<std::size_t>(n, b.construction_k), Weighting::unit());
  b.selection_k = std::min<std::size_t>(30, n - 1);
  b.selection_sigma = avg_knn_distance(D, b.selection_k);
  const auto w = b.selection_sigma > 0.0 ? Weighting::rbf(b.selection_sigma) : Weighting::unit();
  b.selection = select_neighbors_graph(D, order, std::vector<std::size_t>(n, b.selection_k), w);
  return b;
}

inline BaselineGraphs baseline_graph(const FeatureMatrix& f) {
  if (f.n() < 4) throw ParameterError("baseline graph needs n >= 4");
  return baseline_graph(pairwise_distances(f));
}

}  // namespace pcut
