#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "revpref/core_types.hpp"

namespace revpref {

/// In-place all-pairs shortest paths over a dense n x n row-major matrix.
inline void floyd_warshall(std::vector<double>& dist, std::size_t n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < n; ++a) {
      const double dak = dist[a * n + k];
      if (dak == inf) continue;
      double* row = &dist[a * n];
      const double* krow = &dist[k * n];
      for (std::size_t b = 0; b < n; ++b) {
        const double cand = dak + krow[b];
        if (cand < row[b]) row[b] = cand;
      }
    }
  }
}

/// Pairwise bounds L(i,j) <= y_i / y_j <= U(i,j) over N positive unknowns.
///
/// Every update writes both the bound and its reciprocal partner, so
/// L(i,j) == 1 / U(j,i) holds at all times. Implication queries and
/// consistent-vector extraction work on the log-space difference system
///   z_j - z_i <= log U(j,i)   (edge i -> j)
/// closed with Floyd-Warshall. The closure is recomputed lazily after any
/// tightening; call finalize() before sharing a matrix across threads.
class RatioBoundMatrix {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  /// Relative slack used when comparing derived bounds against a query.
  static constexpr double kRelTol = 1e-9;
  /// Log-space slack added to every edge before the closure.
  static constexpr double kEdgeSlack = 1e-13;

  RatioBoundMatrix() = default;
  explicit RatioBoundMatrix(std::size_t n) : n_(n), lower_(n * n, 0.0), upper_(n * n, kInf) {
    for (std::size_t i = 0; i < n; ++i) {
      lower_[at(i, i)] = 1.0;
      upper_[at(i, i)] = 1.0;
    }
  }

  /// Rebuilds a matrix from stored bound arrays (row-major N x N).
  static RatioBoundMatrix from_bounds(std::size_t n, std::vector<double> lower, std::vector<double> upper) {
    if (lower.size() != n * n || upper.size() != n * n) {
      throw DimensionMismatch("RatioBoundMatrix::from_bounds: expected N*N entries");
    }
    RatioBoundMatrix m(n);
    for (std::size_t k = 0; k < n * n; ++k) {
      if (!(lower[k] >= 0.0) || !(upper[k] > 0.0) || std::isnan(lower[k]) || std::isinf(lower[k])) {
        throw std::invalid_argument("RatioBoundMatrix::from_bounds: bounds out of range");
      }
    }
    m.lower_ = std::move(lower);
    m.upper_ = std::move(upper);
    for (std::size_t i = 0; i < n; ++i) {
      m.lower_[m.at(i, i)] = 1.0;
      m.upper_[m.at(i, i)] = 1.0;
    }
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double lower(std::size_t i, std::size_t j) const { return lower_[checked(i, j)]; }
  double upper(std::size_t i, std::size_t j) const { return upper_[checked(i, j)]; }

  /// L(i,j) <- max(L(i,j), c), U(j,i) <- min(U(j,i), 1/c).
  bool tighten_lower(std::size_t i, std::size_t j, double c) {
    check_ratio(c, "tighten_lower");
    const std::size_t ij = checked(i, j);
    if (c <= lower_[ij]) return false;
    lower_[ij] = c;
    upper_[at(j, i)] = std::min(upper_[at(j, i)], 1.0 / c);
    dirty_ = true;
    return true;
  }

  /// U(i,j) <- min(U(i,j), c), L(j,i) <- max(L(j,i), 1/c).
  bool tighten_upper(std::size_t i, std::size_t j, double c) {
    check_ratio(c, "tighten_upper");
    const std::size_t ij = checked(i, j);
    if (c >= upper_[ij]) return false;
    upper_[ij] = c;
    lower_[at(j, i)] = std::max(lower_[at(j, i)], 1.0 / c);
    dirty_ = true;
    return true;
  }

  /// For each sequence (e0, e1, e2, ...) records y_e0 >= y_e1 >= y_e2 >= ...
  void add_monotonicity_chain(std::span<const std::vector<std::size_t>> chains) {
    for (const auto& chain : chains) {
      for (std::size_t k = 1; k < chain.size(); ++k) tighten_upper(chain[k], chain[k - 1], 1.0);
    }
  }

  /// Tightest lower bound on y_i / y_j implied by all stored bounds.
  double derived_lower(std::size_t i, std::size_t j) const {
    const auto& d = closure();
    return std::exp(-d[checked(i, j)]);
  }

  /// Tightest upper bound on y_i / y_j implied by all stored bounds.
  double derived_upper(std::size_t i, std::size_t j) const {
    const auto& d = closure();
    return std::exp(d[checked(j, i)]);
  }

  /// True iff every positive y meeting the stored bounds has y_i / y_j >= c.
  bool implies_geq(std::size_t i, std::size_t j, double c) const {
    if (!(c > 0.0)) return true;
    if (!std::isfinite(c)) return false;
    const double dist = closure()[checked(i, j)];
    if (dist == kInf) return false;
    return -dist >= std::log(c) - kRelTol;
  }

  /// A positive y meeting every stored bound, scaled so max_i y_i = 1.
  std::vector<double> consistent_vector() const {
    const auto& d = closure();
    std::vector<double> z(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) z[i] = std::min(z[i], d[at(j, i)]);
    }
    const double top = n_ == 0 ? 0.0 : *std::max_element(z.begin(), z.end());
    std::vector<double> y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = std::exp(z[i] - top);
    return y;
  }

  /// Whether y satisfies every stored bound to relative tolerance tol.
  bool satisfied_by(std::span<const double> y, double tol = kRelTol) const {
    require_same_size(y.size(), n_, "RatioBoundMatrix::satisfied_by");
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const double r = y[i] / y[j];
        if (r < lower_[at(i, j)] * (1.0 - tol)) return false;
        if (r > upper_[at(i, j)] * (1.0 + tol)) return false;
      }
    }
    return true;
  }

  /// Whether the stored bounds admit a positive solution.
  bool consistent() const {
    try {
      closure();
      return true;
    } catch (const Inconsistent&) {
      return false;
    }
  }

  /// Computes the closure now so later const queries do no writes.
  void finalize() const { closure(); }

  /// Log-space shortest-path matrix: entry (a, b) bounds z_b - z_a from above.
  const std::vector<double>& closure() const {
    if (dirty_) recompute();
    if (inconsistent_) throw Inconsistent("ratio bounds admit no positive solution");
    return dist_;
  }

 private:
  std::size_t at(std::size_t i, std::size_t j) const noexcept { return i * n_ + j; }

  std::size_t checked(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw std::out_of_range("RatioBoundMatrix: index out of range");
    return at(i, j);
  }

  static void check_ratio(double c, const char* what) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument(std::string(what) + ": ratio must be finite and positive");
    }
  }

  void recompute() const {
    dist_.assign(n_ * n_, kInf);
    for (std::size_t a = 0; a < n_; ++a) {
      for (std::size_t b = 0; b < n_; ++b) {
        // z_b - z_a <= log U(b,a), and equivalently <= -log L(a,b).
        double w = kInf;
        if (upper_[at(b, a)] < kInf) w = std::log(upper_[at(b, a)]);
        if (lower_[at(a, b)] > 0.0) w = std::min(w, -std::log(lower_[at(a, b)]));
        // Each edge gets a hair of slack so rounding in exactly tight cycles
        // cannot form a negative cycle, which the closure would amplify.
        dist_[at(a, b)] = a == b ? 0.0 : w + kEdgeSlack;
      }
    }
    floyd_warshall(dist_, n_);
    inconsistent_ = false;
    for (std::size_t a = 0; a < n_; ++a) {
      if (dist_[at(a, a)] < -kRelTol) inconsistent_ = true;
      dist_[at(a, a)] = std::min(dist_[at(a, a)], 0.0);
    }
    dirty_ = false;
  }

  std::size_t n_ = 0;
  std::vector<double> lower_;
  std::vector<double> upper_;
  mutable std::vector<double> dist_;
  mutable bool dirty_ = true;
  mutable bool inconsistent_ = false;
};

}  // namespace revpref
