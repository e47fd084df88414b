#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "similarity.hpp"

namespace pcut {

// Two-block stochastic block model. Block 0 has round(alpha * n) nodes.
struct SbmSpec {
  std::size_t n = 500;
  double alpha = 0.05;
  double p1 = 0.2;
  double p2 = 0.2;
  double q = 0.03;
  // Overwrite p2 so both blocks have the same expected degree.
  bool equalize_degrees = false;
  std::uint64_t seed = 0;

  std::size_t n1() const { return static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n))); }
  std::size_t n2() const { return n - n1(); }

  // p2 after optional equalization; throws ParameterError if invalid.
  double effective_p2() const {
    if (!equalize_degrees) return p2;
    const double a = static_cast<double>(n1()), b = static_cast<double>(n2());
    return ((a - 1.0) * p1 + (b - a) * q) / (b - 1.0);
  }

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 0.5)) throw ParameterError("alpha must lie in (0, 0.5]");
    if (n1() < 1 || n2() < 2) throw ParameterError("both SBM blocks need nodes");
    for (double p : {p1, p2, q}) {
      if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("SBM probabilities must lie in [0,1]");
    }
    const double pp = effective_p2();
    if (!(pp >= 0.0 && pp <= 1.0)) {
      throw ParameterError("equalized p2 = " + std::to_string(pp) + " falls outside [0,1]");
    }
  }
};

struct LabeledGraph {
  WeightedGraph graph;
  Partition truth;
};

inline LabeledGraph sbm_generate(const SbmSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n, n1 = spec.n1();
  const double p2 = spec.effective_p2();
  std::vector<std::size_t> labels(n, 1);
  for (std::size_t v = 0; v < n1; ++v) labels[v] = 0;
  std::vector<Edge> es;
  for (NodeId u = 0; u < n; ++u) {
    // one stream per row keeps rows independent of each other
    CounterRng rng(spec.seed, "sbm", u);
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = labels[u] != labels[v] ? spec.q : (labels[u] == 0 ? spec.p1 : p2);
      if (rng.bernoulli(p)) es.push_back({u, v, 1.0});
    }
  }
  return {WeightedGraph(n, es), Partition(std::move(labels), 2)};
}

struct SbmBounds {
  double q_lb;
  double q_ub;
};

// Phase-transition bounds for two-block SBM spectral recovery.
inline SbmBounds sbm_bounds(double alpha, double p1, double p2) {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw ParameterError("alpha must lie in (0, 0.5]");
  if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0)) throw ParameterError("probabilities must lie in [0,1]");
  const double a = alpha * p1, b = (1.0 - alpha) * p2;
  const double num = a + b - std::abs(a - b);
  return {num / (2.0 * (1.0 - alpha)), num / (2.0 * alpha)};
}

struct LabeledFeatures {
  FeatureMatrix features;
  Partition truth;
};

struct MixtureComponent {
  double weight;
  std::vector<double> mean;
  std::vector<double> variance;  // diagonal covariance
};

// Each sample picks a component with probability equal to its weight, then
// draws from that diagonal Gaussian.
inline LabeledFeatures gaussian_mixture(std::size_t n, const std::vector<MixtureComponent>& comps, std::uint64_t seed) {
  if (comps.empty()) throw ParameterError("mixture needs components");
  const std::size_t d = comps.front().mean.size();
  double total = 0.0;
  for (const auto& c : comps) {
    if (!(c.weight > 0.0)) throw ParameterError("mixture weights must be positive");
    if (c.mean.size() != d || c.variance.size() != d) throw DimensionError("component dimensions differ");
    for (double s : c.variance) {
      if (!(s >= 0.0)) throw ParameterError("variances must be nonnegative");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("mixture weights must sum to 1");

  CounterRng pick(seed, "mixture-component");
  CounterRng noise(seed, "mixture-noise");
  std::vector<double> x;
  x.reserve(n * d);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = pick.uniform();
    std::size_t c = 0;
    while (c + 1 < comps.size() && u >= comps[c].weight) {
      u -= comps[c].weight;
      ++c;
    }
    labels[i] = c;
    for (std::size_t j = 0; j < d; ++j) x.push_back(comps[c].mean[j] + std::sqrt(comps[c].variance[j]) * noise.normal());
  }
  return {FeatureMatrix(n, d, std::move(x)), Partition(std::move(labels), comps.size())};
}

// Geometry of the two-crescent + blob dataset, in units of the arc radius.
struct CrescentGeometry {
  static constexpr double radius = 1.0;
  // upper arc centered at the origin; lower arc centered at (radius, radius/2)
  static constexpr double lower_dx = 1.0;
  static constexpr double lower_dy = 0.5;
  static constexpr double blob_x = 2.5;
  static constexpr double blob_y = 0.25;
  static constexpr double blob_sd = 0.1;
};

namespace detail {

inline double distance_to_arcs(double x, double y) {
  // Distance to an upper half circle of radius 1 centered at (cx, cy) with
  // orientation `up` (true: y >= cy).
  auto arc = [](double px, double py, double cx, double cy, bool up) {
    const double dx = px - cx, dy = py - cy;
    const bool inside = up ? dy >= 0.0 : dy <= 0.0;
    if (inside) return std::abs(std::hypot(dx, dy) - CrescentGeometry::radius);
    const double e1 = std::hypot(dx - CrescentGeometry::radius, dy);
    const double e2 = std::hypot(dx + CrescentGeometry::radius, dy);
    return std::min(e1, e2);
  };
  return std::min(arc(x, y, 0.0, 0.0, true),
                  arc(x, y, CrescentGeometry::lower_dx, CrescentGeometry::lower_dy, false));
}

}  // namespace detail

// Two interleaved half-annulus arcs with radial Gaussian noise plus one
// isotropic Gaussian blob to their right. Labels: 0 upper arc, 1 lower arc,
// 2 blob. Sizes follow `fractions`, rounding remainder to the first class.
inline LabeledFeatures crescent_dataset(std::size_t n, std::vector<double> fractions, double noise, std::uint64_t seed) {
  if (fractions.size() != 3) throw ParameterError("need three fractions");
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ParameterError("fractions must be nonnegative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("fractions must sum to 1");
  if (!(noise >= 0.0)) throw ParameterError("noise must be nonnegative");
  const double clearance = detail::distance_to_arcs(CrescentGeometry::blob_x, CrescentGeometry::blob_y);
  if (clearance < 3.0 * CrescentGeometry::blob_sd) throw ParameterError("blob overlaps the arcs");

  std::vector<std::size_t> sizes(3);
  std::size_t assigned = 0;
  for (std::size_t c = 1; c < 3; ++c) {
    sizes[c] = static_cast<std::size_t>(std::llround(fractions[c] * static_cast<double>(n)));
    assigned += sizes[c];
  }
  if (assigned > n) throw ParameterError("fractions exceed n");
  sizes[0] = n - assigned;

  CounterRng rng(seed, "crescents");
  std::vector<double> x;
  x.reserve(2 * n);
  std::vector<std::size_t> labels;
  labels.reserve(n);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < sizes[c]; ++i) {
      const double t = std::numbers::pi * rng.uniform();
      const double r = CrescentGeometry::radius + noise * rng.normal();
      if (c == 0) {
        x.push_back(r * std::cos(t));
        x.push_back(r * std::sin(t));
      } else {
        x.push_back(CrescentGeometry::lower_dx - r * std::cos(t));
        x.push_back(CrescentGeometry::lower_dy - r * std::sin(t));
      }
      labels.push_back(c);
    }
  }
  for (std::size_t i = 0; i < sizes[2]; ++i) {
    x.push_back(CrescentGeometry::blob_x + CrescentGeometry::blob_sd * rng.normal());
    x.push_back(CrescentGeometry::blob_y + CrescentGeometry::blob_sd * rng.normal());
    labels.push_back(2);
  }
  return {FeatureMatrix(n, 2, std::move(x)), Partition(std::move(labels), 3)};
}

}  // namespace pcut
