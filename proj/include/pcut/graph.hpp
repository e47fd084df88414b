#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "error.hpp"

namespace pcut {

using NodeId = std::size_t;

struct Edge {
  NodeId u;
  NodeId v;
  double w = 1.0;
};

struct Neighbor {
  NodeId id;
  double w;
};

// Undirected graph with strictly positive edge weights.
//
// Adjacency lists are kept sorted by neighbor id, so every traversal visits
// nodes in a fixed order. Instances are immutable once constructed.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  // Throws ParameterError on self-loops, out-of-range ids, non-positive or
  // non-finite weights and duplicate unordered pairs.
  WeightedGraph(std::size_t n, std::span<const Edge> edges) : adj_(n) {
    for (const auto& e : edges) {
      if (e.u >= n || e.v >= n) {
        throw ParameterError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                             ") references a node outside [0," + std::to_string(n) + ")");
      }
      if (e.u == e.v) throw ParameterError("self-loop at node " + std::to_string(e.u));
      if (!(e.w > 0.0) || !std::isfinite(e.w)) {
        throw ParameterError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                             ") has non-positive or non-finite weight");
      }
      adj_[e.u].push_back({e.v, e.w});
      adj_[e.v].push_back({e.u, e.w});
    }
    for (std::size_t v = 0; v < n; ++v) {
      auto& row = adj_[v];
      std::sort(row.begin(), row.end(), [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
      for (std::size_t i = 1; i < row.size(); ++i) {
        if (row[i].id == row[i - 1].id) {
          throw ParameterError("duplicate edge between " + std::to_string(std::min(v, row[i].id)) +
                               " and " + std::to_string(std::max(v, row[i].id)));
        }
      }
      num_edges_ += row.size();
    }
    num_edges_ /= 2;
  }

  WeightedGraph(std::size_t n, const std::vector<Edge>& edges)
      : WeightedGraph(n, std::span<const Edge>(edges)) {}

  std::size_t n() const noexcept { return adj_.size(); }
  std::size_t num_edges() const noexcept { return num_edges_; }

  std::span<const Neighbor> neighbors(NodeId v) const { return adj_.at(v); }
  std::size_t degree_count(NodeId v) const { return adj_.at(v).size(); }

  // 0 when the edge is absent.
  double weight(NodeId u, NodeId v) const {
    const auto& row = adj_.at(u);
    auto it = std::lower_bound(row.begin(), row.end(), v,
                               [](const Neighbor& a, NodeId id) { return a.id < id; });
    return (it != row.end() && it->id == v) ? it->w : 0.0;
  }

  bool has_edge(NodeId u, NodeId v) const { return weight(u, v) > 0.0; }

  // Edges with u < v in lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges_);
    for (NodeId u = 0; u < n(); ++u) {
      for (const auto& nb : adj_[u]) {
        if (nb.id > u) out.push_back({u, nb.id, nb.w});
      }
    }
    return out;
  }

  double total_weight() const {
    double s = 0.0;
    for (NodeId u = 0; u < n(); ++u) {
      for (const auto& nb : adj_[u]) {
        if (nb.id > u) s += nb.w;
      }
    }
    return s;
  }

  // Same edge set, every weight replaced by 1.
  WeightedGraph unweighted() const {
    auto es = edges();
    for (auto& e : es) e.w = 1.0;
    return WeightedGraph(n(), es);
  }

  // Subgraph induced by `keep` (in the given order); node i of the result is keep[i].
  WeightedGraph induced(std::span<const NodeId> keep) const {
    std::vector<std::size_t> pos(n(), static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < keep.size(); ++i) pos.at(keep[i]) = i;
    std::vector<Edge> es;
    for (const auto& e : edges()) {
      if (pos[e.u] != static_cast<std::size_t>(-1) && pos[e.v] != static_cast<std::size_t>(-1)) {
        es.push_back({pos[e.u], pos[e.v], e.w});
      }
    }
    return WeightedGraph(keep.size(), es);
  }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    if (a.n() != b.n()) return false;
    for (NodeId v = 0; v < a.n(); ++v) {
      const auto& ra = a.adj_[v];
      const auto& rb = b.adj_[v];
      if (ra.size() != rb.size()) return false;
      for (std::size_t i = 0; i < ra.size(); ++i) {
        if (ra[i].id != rb[i].id || ra[i].w != rb[i].w) return false;
      }
    }
    return true;
  }

 private:
  std::vector<std::vector<Neighbor>> adj_;
  std::size_t num_edges_ = 0;
};

// Assignment of n nodes to clusters 0..K-1.
struct Partition {
  std::vector<std::size_t> labels;
  std::size_t K = 0;

  Partition() = default;

  Partition(std::vector<std::size_t> assignment, std::size_t k) : labels(std::move(assignment)), K(k) {
    if (K == 0) throw ParameterError("partition needs at least one cluster");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= K) {
        throw ParameterError("node " + std::to_string(i) + " has cluster " + std::to_string(labels[i]) +
                             " >= K=" + std::to_string(K));
      }
    }
  }

  // K inferred as max label + 1.
  static Partition from_labels(std::vector<std::size_t> assignment) {
    std::size_t k = 0;
    for (auto l : assignment) k = std::max(k, l + 1);
    return Partition(std::move(assignment), std::max<std::size_t>(k, 1));
  }

  std::size_t n() const noexcept { return labels.size(); }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(K, 0);
    for (auto l : labels) ++s[l];
    return s;
  }

  std::size_t min_size() const {
    auto s = sizes();
    return *std::min_element(s.begin(), s.end());
  }

  friend bool operator==(const Partition&, const Partition&) = default;
};

// Sum over clusters of Cut(C_i, complement of C_i). For K=2 both terms are the
// same crossing weight and the bipartition cut is returned once.
inline double cut_value(const WeightedGraph& g, const Partition& p) {
  if (p.n() != g.n()) {
    throw DimensionError("partition has " + std::to_string(p.n()) + " labels for a graph of " +
                         std::to_string(g.n()) + " nodes");
  }
  double crossing = 0.0;
  for (const auto& e : g.edges()) {
    if (p.labels[e.u] != p.labels[e.v]) crossing += e.w;
  }
  return p.K == 2 ? crossing : 2.0 * crossing;
}

inline std::vector<double> degrees(const WeightedGraph& g) {
  std::vector<double> d(g.n(), 0.0);
  for (NodeId v = 0; v < g.n(); ++v) {
    for (const auto& nb : g.neighbors(v)) d[v] += nb.w;
  }
  return d;
}

// Component ids are assigned in order of each component's smallest node.
inline Partition connected_components(const WeightedGraph& g) {
  constexpr auto kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(g.n(), kUnset);
  std::size_t count = 0;
  std::queue<NodeId> frontier;
  for (NodeId s = 0; s < g.n(); ++s) {
    if (comp[s] != kUnset) continue;
    comp[s] = count;
    frontier.push(s);
    while (!frontier.empty()) {
      const NodeId v = frontier.front();
      frontier.pop();
      for (const auto& nb : g.neighbors(v)) {
        if (comp[nb.id] == kUnset) {
          comp[nb.id] = count;
          frontier.push(nb.id);
        }
      }
    }
    ++count;
  }
  return Partition(std::move(comp), std::max<std::size_t>(count, 1));
}

// Parsed edge list plus the id base that was detected (0 or 1).
struct EdgeList {
  WeightedGraph graph;
  std::size_t base = 0;
};

// Text format: one edge per line, "u v [w]". Lines that are blank or start with
// '#' or '%' are skipped. Ids are 1-based when the smallest id is 1, otherwise
// 0-based. Errors carry the 1-based line number.
inline EdgeList parse_edge_list(const std::string& text) {
  struct Raw {
    long long u, v;
    double w;
    std::size_t line;
  };
  std::vector<Raw> raw;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == '%') continue;
    std::istringstream ls(line);
    long long u = 0, v = 0;
    if (!(ls >> u >> v)) throw InputError("line " + std::to_string(lineno) + ": expected 'u v [w]'");
    double w = 1.0;
    std::string extra;
    if (ls >> extra) {
      try {
        std::size_t used = 0;
        w = std::stod(extra, &used);
        if (used != extra.size()) throw std::invalid_argument(extra);
      } catch (const std::exception&) {
        throw InputError("line " + std::to_string(lineno) + ": bad weight '" + extra + "'");
      }
      if (ls >> extra) throw InputError("line " + std::to_string(lineno) + ": trailing field '" + extra + "'");
    }
    if (u < 0 || v < 0) throw InputError("line " + std::to_string(lineno) + ": negative node id");
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InputError("line " + std::to_string(lineno) + ": weight must be positive and finite");
    }
    if (u == v) throw InputError("line " + std::to_string(lineno) + ": self-loop on node " + std::to_string(u));
    raw.push_back({u, v, w, lineno});
  }
  if (raw.empty()) throw InputError("edge list is empty");

  long long lo = raw.front().u, hi = 0;
  for (const auto& r : raw) {
    lo = std::min({lo, r.u, r.v});
    hi = std::max({hi, r.u, r.v});
  }
  const std::size_t base = lo >= 1 ? 1 : 0;
  const std::size_t n = static_cast<std::size_t>(hi) + 1 - base;

  std::vector<std::pair<std::pair<NodeId, NodeId>, std::size_t>> keys;
  keys.reserve(raw.size());
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& r : raw) {
    NodeId a = static_cast<NodeId>(r.u) - base, b = static_cast<NodeId>(r.v) - base;
    edges.push_back({a, b, r.w});
    keys.push_back({{std::min(a, b), std::max(a, b)}, r.line});
  }
  std::sort(keys.begin(), keys.end());
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (keys[i].first == keys[i - 1].first) {
      throw InputError("line " + std::to_string(std::max(keys[i].second, keys[i - 1].second)) +
                       ": duplicate edge (first seen on line " +
                       std::to_string(std::min(keys[i].second, keys[i - 1].second)) + ")");
    }
  }
  return {WeightedGraph(n, edges), base};
}

inline std::string format_edge_list(const WeightedGraph& g, std::size_t base = 0, bool with_weights = true) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& e : g.edges()) {
    out << e.u + base << ' ' << e.v + base;
    if (with_weights) out << ' ' << e.w;
    out << '\n';
  }
  return out.str();
}

}  // namespace pcut
