#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "graph.hpp"

namespace pcut {

struct LabelSet {
  std::vector<std::pair<NodeId, std::size_t>> labeled;  // (node, class)
  std::size_t K = 0;

  // Throws ConstraintError unless every class has a labeled node and nodes
  // are unique and in range.
  void validate(std::size_t n) const {
    if (K < 2) throw ParameterError("need at least two classes");
    std::vector<std::size_t> per_class(K, 0);
    std::vector<bool> seen(n, false);
    for (const auto& [node, cls] : labeled) {
      if (node >= n) throw ConstraintError("labeled node " + std::to_string(node) + " is out of range");
      if (cls >= K) throw ConstraintError("class " + std::to_string(cls) + " is out of range");
      if (seen[node]) throw ConstraintError("node " + std::to_string(node) + " is labeled twice");
      seen[node] = true;
      ++per_class[cls];
    }
    for (std::size_t c = 0; c < K; ++c) {
      if (per_class[c] == 0) throw ConstraintError("class " + std::to_string(c) + " has no labeled node");
    }
  }
};

// "node_id,class" per line (comma or whitespace separated); ids are shifted by
// `base`. Lines starting with '#' are comments and a non-numeric first data
// line is a header. K is max class + 1 unless given.
inline LabelSet parse_labels(const std::string& text, std::size_t base = 0, std::size_t K = 0) {
  LabelSet out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t kmax = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '#') continue;
    for (auto& ch : line) {
      if (ch == ',' || ch == '\t' || ch == '\r') ch = ' ';
    }
    if (line.find_first_not_of(' ') == std::string::npos) continue;
    std::istringstream ls(line);
    long long node = 0, cls = 0;
    const bool header_allowed = first;
    first = false;
    if (!(ls >> node >> cls)) {
      if (header_allowed) continue;
      throw InputError("line " + std::to_string(lineno) + ": expected 'node_id,class'");
    }
    std::string extra;
    if (ls >> extra) throw InputError("line " + std::to_string(lineno) + ": trailing field '" + extra + "'");
    if (node < static_cast<long long>(base) || cls < 0) {
      throw InputError("line " + std::to_string(lineno) + ": negative node id or class");
    }
    out.labeled.emplace_back(static_cast<NodeId>(node) - base, static_cast<std::size_t>(cls));
    kmax = std::max(kmax, static_cast<std::size_t>(cls) + 1);
  }
  out.K = K ? K : kmax;
  return out;
}

struct GrfResult {
  Eigen::MatrixXd scores;  // n x K, rows sum to 1
  Partition partition;
};

// Harmonic label propagation: solve L_uu F_u = W_ul F_l with a sparse
// Cholesky factorization, then take the per-node argmax (ties: lower class).
inline GrfResult grf_scores(const WeightedGraph& g, const LabelSet& labels) {
  const std::size_t n = g.n();
  labels.validate(n);
  const std::size_t K = labels.K;

  constexpr auto kUnlabeled = static_cast<std::size_t>(-1);
  std::vector<std::size_t> cls(n, kUnlabeled);
  for (const auto& [node, c] : labels.labeled) cls[node] = c;

  const auto comps = connected_components(g);
  std::vector<bool> has_label(comps.K, false);
  for (NodeId v = 0; v < n; ++v) {
    if (cls[v] != kUnlabeled) has_label[comps.labels[v]] = true;
  }
  for (NodeId v = 0; v < n; ++v) {
    if (!has_label[comps.labels[v]]) {
      std::size_t size = 0;
      for (auto c : comps.labels) size += c == comps.labels[v] ? 1 : 0;
      throw ConstraintError("connected component " + std::to_string(comps.labels[v]) + " (containing node " +
                            std::to_string(v) + ", " + std::to_string(size) + " nodes) has no labeled node");
    }
  }

  std::vector<std::size_t> pos(n, kUnlabeled);
  std::size_t nu = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (cls[v] == kUnlabeled) pos[v] = nu++;
  }

  GrfResult out;
  out.scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
  for (NodeId v = 0; v < n; ++v) {
    if (cls[v] != kUnlabeled) out.scores(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(cls[v])) = 1.0;
  }

  if (nu > 0) {
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nu), static_cast<Eigen::Index>(K));
    for (NodeId v = 0; v < n; ++v) {
      if (pos[v] == kUnlabeled) continue;
      const auto i = static_cast<Eigen::Index>(pos[v]);
      double deg = 0.0;
      for (const auto& nb : g.neighbors(v)) {
        deg += nb.w;
        if (pos[nb.id] != kUnlabeled) {
          trip.emplace_back(i, static_cast<Eigen::Index>(pos[nb.id]), -nb.w);
        } else {
          rhs(i, static_cast<Eigen::Index>(cls[nb.id])) += nb.w;
        }
      }
      trip.emplace_back(i, i, deg);
    }
    Eigen::SparseMatrix<double> Luu(static_cast<Eigen::Index>(nu), static_cast<Eigen::Index>(nu));
    Luu.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol(Luu);
    if (chol.info() != Eigen::Success) throw NumericError("harmonic system is not positive definite");
    Eigen::MatrixXd Fu = chol.solve(rhs);
    if (chol.info() != Eigen::Success || !Fu.allFinite()) throw NumericError("harmonic solve failed");
    for (NodeId v = 0; v < n; ++v) {
      if (pos[v] != kUnlabeled) out.scores.row(static_cast<Eigen::Index>(v)) = Fu.row(static_cast<Eigen::Index>(pos[v]));
    }
  }

  std::vector<std::size_t> assign(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    if (cls[v] != kUnlabeled) {
      assign[v] = cls[v];
      continue;
    }
    std::size_t arg = 0;
    const auto row = out.scores.row(static_cast<Eigen::Index>(v));
    // scores closer than 1e-12 count as tied
    for (std::size_t c = 1; c < K; ++c) {
      if (row(static_cast<Eigen::Index>(c)) > row(static_cast<Eigen::Index>(arg)) + 1e-12) arg = c;
    }
    assign[v] = arg;
  }
  out.partition = Partition(std::move(assign), K);
  return out;
}

inline Partition grf_propagate(const WeightedGraph& g, const LabelSet& labels) {
  return grf_scores(g, labels).partition;
}

}  // namespace pcut
