#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace pcut {

enum class LaplacianVariant {
  // L = D - W (ratio cut relaxation)
  rcut_unnormalized,
  // L_sym = I - D^{-1/2} W D^{-1/2} (normalized cut relaxation)
  ncut_normalized,
};

inline const char* to_string(LaplacianVariant v) {
  return v == LaplacianVariant::rcut_unnormalized ? "rcut_unnormalized" : "ncut_normalized";
}

struct SpectralConfig {
  std::size_t K = 2;
  LaplacianVariant variant = LaplacianVariant::ncut_normalized;
  // Scale each embedding row to unit length before k-means (Ng-Jordan-Weiss).
  bool normalize_rows = false;
  std::size_t kmeans_restarts = 10;
  std::size_t kmeans_max_iters = 100;
  std::uint64_t seed = 0;
};

inline Eigen::MatrixXd laplacian(const WeightedGraph& g, LaplacianVariant variant) {
  const auto n = static_cast<Eigen::Index>(g.n());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  const auto deg = degrees(g);
  if (variant == LaplacianVariant::rcut_unnormalized) {
    for (NodeId v = 0; v < g.n(); ++v) {
      const auto i = static_cast<Eigen::Index>(v);
      L(i, i) = deg[v];
      for (const auto& nb : g.neighbors(v)) L(i, static_cast<Eigen::Index>(nb.id)) = -nb.w;
    }
    return L;
  }
  std::vector<double> inv_sqrt(g.n(), 0.0);
  for (NodeId v = 0; v < g.n(); ++v) inv_sqrt[v] = deg[v] > 0.0 ? 1.0 / std::sqrt(deg[v]) : 0.0;
  for (NodeId v = 0; v < g.n(); ++v) {
    const auto i = static_cast<Eigen::Index>(v);
    // isolated nodes get a zero diagonal
    L(i, i) = deg[v] > 0.0 ? 1.0 : 0.0;
    for (const auto& nb : g.neighbors(v)) {
      L(i, static_cast<Eigen::Index>(nb.id)) = -nb.w * inv_sqrt[v] * inv_sqrt[nb.id];
    }
  }
  return L;
}

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // one column per eigenvalue
};

namespace detail {

// Eigenvalues of the symmetric tridiagonal matrix (diag, off) by the implicit
// QL method with Wilkinson-type shifts. off[i] couples i and i+1.
inline std::vector<double> tridiagonal_eigenvalues(std::vector<double> d, std::vector<double> off) {
  const auto n = static_cast<std::ptrdiff_t>(d.size());
  std::vector<double> e(d.size(), 0.0);
  for (std::ptrdiff_t i = 0; i + 1 < n; ++i) e[i] = off[i];
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxIter = 60;
  for (std::ptrdiff_t l = 0; l < n; ++l) {
    int iter = 0;
    std::ptrdiff_t m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m != l) {
        if (iter++ == kMaxIter) {
          throw NumericError("implicit QL did not converge for eigenvalue " + std::to_string(l) + " after " +
                             std::to_string(kMaxIter) + " iterations (residual off-diagonal " +
                             std::to_string(std::abs(e[l])) + ")");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        std::ptrdiff_t i = m - 1;
        for (; i >= l; --i) {
          const double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

// LU factorization with partial pivoting of a shifted tridiagonal matrix,
// reused across inverse-iteration solves.
class ShiftedTridiagonalLU {
 public:
  ShiftedTridiagonalLU(const std::vector<double>& diag, const std::vector<double>& off, double shift, double tiny)
      : n_(diag.size()), d_(n_), du_(n_, 0.0), du2_(n_, 0.0), dl_(n_, 0.0), swapped_(n_, false) {
    for (std::size_t i = 0; i < n_; ++i) d_[i] = diag[i] - shift;
    for (std::size_t i = 0; i + 1 < n_; ++i) du_[i] = dl_[i] = off[i];
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (std::abs(d_[i]) >= std::abs(dl_[i])) {
        if (d_[i] != 0.0) {
          const double fact = dl_[i] / d_[i];
          dl_[i] = fact;
          d_[i + 1] -= fact * du_[i];
        } else {
          dl_[i] = 0.0;
        }
      } else {
        const double fact = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = fact;
        const double temp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = temp - fact * d_[i + 1];
        if (i + 2 < n_) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        swapped_[i] = true;
      }
    }
    for (auto& x : d_) {
      if (std::abs(x) < tiny) x = x < 0.0 ? -tiny : tiny;
    }
  }

  void solve(std::vector<double>& b) const {
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (!swapped_[i]) {
        b[i + 1] -= dl_[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl_[i] * b[i];
      }
    }
    b[n_ - 1] /= d_[n_ - 1];
    if (n_ > 1) b[n_ - 2] = (b[n_ - 2] - du_[n_ - 2] * b[n_ - 1]) / d_[n_ - 2];
    for (std::size_t k = n_ >= 2 ? n_ - 2 : 0; k-- > 0;) {
      b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
    }
  }

 private:
  std::size_t n_;
  std::vector<double> d_, du_, du2_, dl_;
  std::vector<bool> swapped_;
};

inline double tridiagonal_residual(const std::vector<double>& diag, const std::vector<double>& off,
                                   const std::vector<double>& y, double lambda) {
  const std::size_t n = diag.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double t = (diag[i] - lambda) * y[i];
    if (i > 0) t += off[i - 1] * y[i - 1];
    if (i + 1 < n) t += off[i] * y[i + 1];
    s += t * t;
  }
  return std::sqrt(s);
}

// First component with magnitude above 1e-12 made nonnegative.
inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

inline double max_residual(const Eigen::MatrixXd& m, const EigenPairs& ep) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < ep.values.size(); ++j) {
    const Eigen::VectorXd r = m * ep.vectors.col(j) - ep.values(j) * ep.vectors.col(j);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

}  // namespace detail

// Residual bound used by smallest_eigenvectors, relative to the Frobenius norm.
inline constexpr double kEigenResidualTolerance = 1e-8;

// The K smallest eigenpairs of a dense symmetric matrix: Householder
// reduction to tridiagonal form, implicit QL for the spectrum, inverse
// iteration with reorthogonalization for the K wanted vectors, and back
// transformation.
inline EigenPairs smallest_eigenvectors(const Eigen::MatrixXd& m, std::size_t K) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw DimensionError("matrix is not square");
  if (K < 1 || static_cast<Eigen::Index>(K) > n) throw ParameterError("need 1 <= K <= n eigenpairs");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (!m.allFinite()) throw InputError("matrix has non-finite entries");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) throw InputError("matrix is not symmetric");
  const double mnorm = m.norm();

  EigenPairs out;
  const auto k = static_cast<Eigen::Index>(K);
  if (n == 1) {
    out.values = Eigen::VectorXd::Constant(1, m(0, 0));
    out.vectors = Eigen::MatrixXd::Ones(1, 1);
    return out;
  }

  Eigen::Tridiagonalization<Eigen::MatrixXd> tri(m);
  std::vector<double> diag(static_cast<std::size_t>(n)), off(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] = tri.diagonal()(i);
  for (Eigen::Index i = 0; i + 1 < n; ++i) off[static_cast<std::size_t>(i)] = tri.subDiagonal()(i);
  double tnorm = 0.0;
  for (std::size_t i = 0; i < diag.size(); ++i) tnorm = std::max(tnorm, std::abs(diag[i]) + 2.0 * std::abs(off[i]));
  tnorm = std::max(tnorm, std::numeric_limits<double>::min());
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i + 1 < diag.size(); ++i) {
    if (std::abs(off[i]) <= kEps * (std::abs(diag[i]) + std::abs(diag[i + 1]))) off[i] = 0.0;
  }

  const auto all = detail::tridiagonal_eigenvalues(diag, off);
  out.values.resize(k);
  Eigen::MatrixXd Y(n, k);
  const double cluster_gap = 1e-3 * tnorm;
  const double tiny = kEps * tnorm;
  CounterRng rng(0x5eed, "inverse-iteration");
  std::vector<double> y(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < k; ++j) {
    double lambda = all[static_cast<std::size_t>(j)];
    // separate coincident shifts so each factorization differs slightly
    if (j > 0 && lambda - out.values(j - 1) < 10.0 * kEps * std::max(1.0, std::abs(lambda))) {
      lambda = out.values(j - 1) + 10.0 * kEps * std::max(1.0, std::abs(lambda));
    }
    out.values(j) = all[static_cast<std::size_t>(j)];
    detail::ShiftedTridiagonalLU lu(diag, off, lambda, tiny);
    for (auto& x : y) x = rng.uniform() - 0.5;
    bool converged = false;
    for (int it = 0; it < 8 && !converged; ++it) {
      lu.solve(y);
      for (Eigen::Index p = 0; p < j; ++p) {
        if (out.values(j) - out.values(p) > cluster_gap) continue;
        double dot = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) dot += y[static_cast<std::size_t>(i)] * Y(i, p);
        for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] -= dot * Y(i, p);
      }
      double norm = 0.0;
      for (double x : y) norm += x * x;
      norm = std::sqrt(norm);
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        for (auto& x : y) x = rng.uniform() - 0.5;
        continue;
      }
      for (auto& x : y) x /= norm;
      converged = it >= 1 && detail::tridiagonal_residual(diag, off, y, out.values(j)) <= 1e-12 * tnorm;
    }
    for (Eigen::Index i = 0; i < n; ++i) Y(i, j) = y[static_cast<std::size_t>(i)];
  }
  out.vectors = tri.matrixQ() * Y;

  double residual = detail::max_residual(m, out);
  if (residual > kEigenResidualTolerance * mnorm) {
    // Inverse iteration lost accuracy (tight eigenvalue clusters); fall back
    // to the full dense solver.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(m);
    if (full.info() != Eigen::Success) throw NumericError("symmetric eigensolver failed to converge");
    out.values = full.eigenvalues().head(k);
    out.vectors = full.eigenvectors().leftCols(k);
    residual = detail::max_residual(m, out);
    if (residual > kEigenResidualTolerance * mnorm) {
      throw NumericError("eigenvector residual " + std::to_string(residual) + " exceeds tolerance " +
                         std::to_string(kEigenResidualTolerance * mnorm));
    }
  }
  for (Eigen::Index j = 0; j < k; ++j) detail::fix_sign(out.vectors.col(j));
  return out;
}

// Labels renumbered in order of first appearance.
inline Partition canonical_labels(const std::vector<std::size_t>& labels, std::size_t K) {
  std::vector<std::size_t> map(K, K), out(labels.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (map[labels[i]] == K) map[labels[i]] = next++;
    out[i] = map[labels[i]];
  }
  return Partition(std::move(out), K);
}

struct KMeansResult {
  Partition partition;
  double wcss = 0.0;
  std::size_t restart = 0;
};

// Lloyd iterations from k-means++ seeds, best of `restarts` by within-cluster
// sum of squares (ties keep the earlier restart). Rows of `points` are samples.
inline KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t K, std::size_t restarts, std::size_t max_iters,
                           std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (K < 1 || n < K) throw ParameterError("k-means needs 1 <= K <= n");
  restarts = std::max<std::size_t>(restarts, 1);
  const auto kk = static_cast<Eigen::Index>(K);

  auto sqdist = [&](std::size_t i, const Eigen::MatrixXd& C, Eigen::Index c) {
    return (points.row(static_cast<Eigen::Index>(i)) - C.row(c)).squaredNorm();
  };

  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (std::size_t rs = 0; rs < restarts; ++rs) {
    CounterRng rng(seed, "kmeans", rs);
    Eigen::MatrixXd C(kk, points.cols());
    std::vector<bool> chosen(n, false);
    std::size_t first = static_cast<std::size_t>(rng.below(n));
    C.row(0) = points.row(static_cast<Eigen::Index>(first));
    chosen[first] = true;
    std::vector<double> dmin(n);
    for (std::size_t i = 0; i < n; ++i) dmin[i] = sqdist(i, C, 0);
    for (Eigen::Index c = 1; c < kk; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : dmin[i];
      std::size_t pick = n;
      if (total > 0.0) {
        double target = rng.uniform() * total;
        for (std::size_t i = 0; i < n; ++i) {
          if (chosen[i]) continue;
          target -= dmin[i];
          if (target < 0.0) {
            pick = i;
            break;
          }
        }
        if (pick == n) {
          for (std::size_t i = n; i-- > 0;) {
            if (!chosen[i] && dmin[i] > 0.0) {
              pick = i;
              break;
            }
          }
        }
      } else {
        // all remaining points coincide with a center: take a uniform unchosen one
        std::size_t remaining = 0;
        for (bool b : chosen) remaining += b ? 0 : 1;
        std::size_t r = static_cast<std::size_t>(rng.below(remaining));
        for (std::size_t i = 0; i < n; ++i) {
          if (chosen[i]) continue;
          if (r-- == 0) {
            pick = i;
            break;
          }
        }
      }
      chosen[pick] = true;
      C.row(c) = points.row(static_cast<Eigen::Index>(pick));
      for (std::size_t i = 0; i < n; ++i) dmin[i] = std::min(dmin[i], sqdist(i, C, c));
    }

    std::vector<std::size_t> assign(n, K);
    std::vector<double> dist(n, 0.0);
    for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iters, 1); ++iter) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t arg = 0;
        double bd = sqdist(i, C, 0);
        for (Eigen::Index c = 1; c < kk; ++c) {
          const double d = sqdist(i, C, c);
          if (d < bd) {
            bd = d;
            arg = static_cast<std::size_t>(c);
          }
        }
        if (assign[i] != arg) changed = true;
        assign[i] = arg;
        dist[i] = bd;
      }
      // refill empty clusters with the point farthest from its center
      std::vector<std::size_t> counts(K, 0);
      for (auto a : assign) ++counts[a];
      for (std::size_t c = 0; c < K; ++c) {
        if (counts[c] > 0) continue;
        std::size_t far = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (counts[assign[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
        }
        if (far == n) break;
        --counts[assign[far]];
        assign[far] = c;
        ++counts[c];
        dist[far] = 0.0;
        changed = true;
      }
      if (!changed && iter > 0) break;
      C.setZero();
      for (std::size_t i = 0; i < n; ++i) C.row(static_cast<Eigen::Index>(assign[i])) += points.row(static_cast<Eigen::Index>(i));
      for (std::size_t c = 0; c < K; ++c) C.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
    }
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) wcss += sqdist(i, C, static_cast<Eigen::Index>(assign[i]));
    if (wcss < best.wcss) {
      best.wcss = wcss;
      best.restart = rs;
      best.partition = canonical_labels(assign, K);
    }
  }
  return best;
}

// Embed with the K smallest Laplacian eigenvectors, then k-means.
inline Partition spectral_clustering(const WeightedGraph& g, const SpectralConfig& cfg) {
  if (cfg.K < 2 || cfg.K > g.n()) throw ParameterError("spectral clustering needs 2 <= K <= n");
  const auto L = laplacian(g, cfg.variant);
  auto eig = smallest_eigenvectors(L, cfg.K);
  Eigen::MatrixXd U = std::move(eig.vectors);
  for (NodeId v = 0; v < g.n(); ++v) {
    const auto i = static_cast<Eigen::Index>(v);
    if (g.degree_count(v) == 0) {
      U.row(i).setZero();
      continue;
    }
    if (cfg.normalize_rows) {
      const double norm = U.row(i).norm();
      if (norm < 1e-12) {
        U.row(i).setZero();
      } else {
        U.row(i) /= norm;
      }
    }
  }
  return kmeans(U, cfg.K, cfg.kmeans_restarts, cfg.kmeans_max_iters, cfg.seed).partition;
}

}  // namespace pcut
