#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "similarity.hpp"

namespace pcut {

// Per-node empirical density rank in {1/n, ..., 1}. Higher means denser.
struct RankVector {
  std::vector<double> r;

  std::size_t size() const noexcept { return r.size(); }
  double operator[](std::size_t i) const { return r[i]; }
};

// Density surrogate for similarity networks: mean distance to the baseline
// neighbors. With `weighted`, the rescaled order-statistic average
//   (1/l) * sum_{i=l-floor((l-1)/2)}^{l+floor(l/2)} (l/i)^{1/dim} D_(i)(v),
// where l = |N(v)| and D_(i) is the i-th nearest-neighbor distance over all
// points, is used instead.
inline std::vector<double> eta_similarity(const DistanceMatrix& D, const WeightedGraph& g0, bool weighted = false,
                                          std::size_t dim = 1) {
  if (g0.n() != D.n) throw DimensionError("baseline graph and features disagree on n");
  if (weighted && dim == 0) throw ParameterError("dimension must be positive for the weighted statistic");
  std::vector<double> eta(D.n, 0.0);
  std::vector<double> sorted;
  for (NodeId v = 0; v < D.n; ++v) {
    const auto nbrs = g0.neighbors(v);
    const std::size_t l = nbrs.size();
    if (l == 0) throw ConstraintError("node " + std::to_string(v) + " is isolated in the baseline graph");
    if (!weighted) {
      double s = 0.0;
      for (const auto& nb : nbrs) s += D(v, nb.id);
      eta[v] = s / static_cast<double>(l);
      continue;
    }
    const std::size_t lo = l - (l - 1) / 2;
    const std::size_t hi = l + l / 2;
    if (hi > D.n - 1) {
      throw ParameterError("weighted statistic needs " + std::to_string(hi) + " neighbors but only " +
                           std::to_string(D.n - 1) + " exist");
    }
    sorted.clear();
    for (NodeId u = 0; u < D.n; ++u) {
      if (u != v) sorted.push_back(D(v, u));
    }
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(hi), sorted.end());
    double s = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      s += std::pow(static_cast<double>(l) / static_cast<double>(i), 1.0 / static_cast<double>(dim)) * sorted[i - 1];
    }
    eta[v] = s / static_cast<double>(l);
  }
  return eta;
}

inline std::vector<double> eta_similarity(const FeatureMatrix& f, const WeightedGraph& g0, bool weighted = false) {
  return eta_similarity(pairwise_distances(f), g0, weighted, f.d());
}

// For each node, s(v,w) = |N(v) ∩ N(w)| aligned with g.neighbors(v).
inline std::vector<std::vector<std::size_t>> common_neighbor_counts(const WeightedGraph& g) {
  std::vector<std::vector<std::size_t>> s(g.n());
  for (NodeId v = 0; v < g.n(); ++v) {
    const auto nv = g.neighbors(v);
    s[v].resize(nv.size());
    for (std::size_t i = 0; i < nv.size(); ++i) {
      const NodeId w = nv[i].id;
      if (w < v) {
        // symmetric; reuse the count stored on w's side
        const auto nw = g.neighbors(w);
        auto it = std::lower_bound(nw.begin(), nw.end(), v, [](const Neighbor& a, NodeId id) { return a.id < id; });
        s[v][i] = s[w][static_cast<std::size_t>(it - nw.begin())];
        continue;
      }
      const auto nw = g.neighbors(w);
      std::size_t count = 0;
      auto a = nv.begin();
      auto b = nw.begin();
      while (a != nv.end() && b != nw.end()) {
        if (a->id < b->id) {
          ++a;
        } else if (b->id < a->id) {
          ++b;
        } else {
          ++count;
          ++a;
          ++b;
        }
      }
      s[v][i] = count;
    }
  }
  return s;
}

// Density surrogate for connectivity networks: minus the mean common-neighbor
// count over a node's neighbors. Weights are ignored. Isolated nodes get 0.
inline std::vector<double> eta_connectivity(const WeightedGraph& g) {
  const auto s = common_neighbor_counts(g);
  std::vector<double> eta(g.n(), 0.0);
  for (NodeId v = 0; v < g.n(); ++v) {
    if (s[v].empty()) continue;
    double sum = 0.0;
    for (auto c : s[v]) sum += static_cast<double>(c);
    eta[v] = -sum / static_cast<double>(s[v].size());
  }
  return eta;
}

inline std::vector<NodeId> isolated_nodes(const WeightedGraph& g) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < g.n(); ++v) {
    if (g.degree_count(v) == 0) out.push_back(v);
  }
  return out;
}

// R(v) = |{w : eta(v) <= eta(w)}| / n, self included. Ties share a rank.
inline RankVector rank(std::span<const double> eta) {
  const std::size_t n = eta.size();
  for (double e : eta) {
    if (!std::isfinite(e)) throw InputError("rank needs finite statistics");
  }
  std::vector<double> sorted(eta.begin(), eta.end());
  std::sort(sorted.begin(), sorted.end());
  RankVector out{std::vector<double>(n)};
  for (std::size_t v = 0; v < n; ++v) {
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), eta[v]);
    out.r[v] = static_cast<double>(sorted.end() - first) / static_cast<double>(n);
  }
  return out;
}

inline RankVector rank(const std::vector<double>& eta) { return rank(std::span<const double>(eta)); }

// One-dimensional Gaussian mixture with analytic density.
struct GaussianMixture1D {
  struct Component {
    double weight;
    double mean;
    double sd;
  };
  std::vector<Component> components;

  static GaussianMixture1D standard() { return {{{1.0, 0.0, 1.0}}}; }

  void validate() const {
    if (components.empty() || components.size() > 2) {
      throw ParameterError("supported densities: standard Gaussian or a two-component 1-D mixture");
    }
    double total = 0.0;
    for (const auto& c : components) {
      if (!(c.weight > 0.0) || !(c.sd > 0.0) || !std::isfinite(c.mean)) {
        throw ParameterError("mixture components need positive weight, positive sd and finite mean");
      }
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ParameterError("mixture weights must sum to 1");
  }

  double pdf(double x) const {
    double s = 0.0;
    for (const auto& c : components) {
      const double z = (x - c.mean) / c.sd;
      s += c.weight * std::exp(-0.5 * z * z) / (c.sd * std::sqrt(2.0 * std::numbers::pi));
    }
    return s;
  }
};

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

}  // namespace detail

// p(y) = integral of f over the level set {x : f(x) <= f(y)}, the limit of the
// empirical rank at y. The level-set boundary is bracketed on a fine grid and
// refined by bisection; the density is then integrated over the sub-level
// intervals with adaptive Simpson.
inline double rank_limit_pvalue(const GaussianMixture1D& density, double y) {
  density.validate();
  if (std::isinf(y)) return 0.0;
  if (std::isnan(y)) throw ParameterError("y must not be NaN");
  const double level = density.pdf(y);

  double lo = density.components.front().mean, hi = lo, smax = 0.0;
  for (const auto& c : density.components) {
    lo = std::min(lo, c.mean);
    hi = std::max(hi, c.mean);
    smax = std::max(smax, c.sd);
  }
  // Mass beyond 40 sd is far below double resolution.
  lo -= 40.0 * smax;
  hi += 40.0 * smax;
  lo = std::min(lo, y);
  hi = std::max(hi, y);

  auto g = [&](double x) { return density.pdf(x) - level; };
  constexpr int kGrid = 20000;
  const double h = (hi - lo) / kGrid;
  std::vector<double> cuts{lo};
  double prev = g(lo);
  for (int i = 1; i <= kGrid; ++i) {
    const double x = lo + h * i;
    const double cur = g(x);
    if ((prev <= 0.0) != (cur <= 0.0)) {
      double a = x - h, b = x;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        if ((g(m) <= 0.0) == (prev <= 0.0)) {
          a = m;
        } else {
          b = m;
        }
      }
      cuts.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  cuts.push_back(hi);

  double p = 0.0;
  auto f = [&](double x) { return density.pdf(x); };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (g(0.5 * (a + b)) <= 0.0) p += detail::integrate(f, a, b, 1e-10);
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace pcut
