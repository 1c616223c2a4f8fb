#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "revpref/all_pairs_learner.hpp"
#include "revpref/core_types.hpp"
#include "revpref/ratio_bounds.hpp"

namespace revpref {

/// Discretization level: max(ceil(2 Q maxBp / eps), ceil(1 / eps)).
inline int choose_k(double curvature, double epsilon, double max_budget_per_price) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("choose_k: epsilon must be positive");
  if (!(curvature >= 0.0)) throw std::invalid_argument("choose_k: Q must be nonnegative");
  if (!(max_budget_per_price > 0.0)) throw std::invalid_argument("choose_k: max B/p must be positive");
  // Shave a few ulps so exact products such as 40.000000000000007 do not round up.
  auto ceil_exact = [](double x) { return std::ceil(x * (1.0 - 1e-12)); };
  const double by_curvature = ceil_exact(2.0 * curvature / epsilon * max_budget_per_price);
  const double by_epsilon = ceil_exact(1.0 / epsilon);
  return std::max(1, static_cast<int>(std::max(by_curvature, by_epsilon)));
}

/// Training-set size for the discretized learner: N = n (k + 2) entities.
inline std::uint64_t required_samples_separable(std::size_t n, int k, double delta, double c = 1.0) {
  if (n < 1 || k < 0) throw std::invalid_argument("required_samples_separable: need n >= 1, k >= 0");
  return pairwise_sample_count(static_cast<double>(n) * (k + 2), delta, c);
}

/// Per-good thresholds l_i in {-1, ..., k}.
struct ThresholdAssignment {
  std::vector<int> levels;
  friend bool operator==(const ThresholdAssignment&, const ThresholdAssignment&) = default;
};

/// Bounds on ratios of discretized derivatives V(i, l) = v_i'(l / k).
///
/// Finite nodes (i, l), l = 0..k, live in a RatioBoundMatrix with a
/// non-increasing chain per good. The sentinels V(i, -1) = +inf and
/// V(i, k + 1) = 0 are resolved symbolically by implied_geq().
class DerivativeGrid {
 public:
  DerivativeGrid(std::size_t n, int k) : n_(n), k_(k), bounds_(n * static_cast<std::size_t>(k + 1)) {
    if (n < 1) throw std::invalid_argument("DerivativeGrid: n must be >= 1");
    if (k < 1) throw std::invalid_argument("DerivativeGrid: k must be >= 1");
    std::vector<std::vector<std::size_t>> chains(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (int l = 0; l <= k; ++l) chains[i].push_back(node(i, l));
    }
    bounds_.add_monotonicity_chain(chains);
  }

  DerivativeGrid(std::size_t n, int k, RatioBoundMatrix bounds) : n_(n), k_(k), bounds_(std::move(bounds)) {
    if (bounds_.size() != n * static_cast<std::size_t>(k + 1)) {
      throw DimensionMismatch("DerivativeGrid: matrix size must be n (k + 1)");
    }
  }

  static DerivativeGrid train(std::span<const Observation> observations, std::size_t n, int k) {
    DerivativeGrid grid(n, k);
    for (const auto& obs : observations) grid.observe(obs);
    grid.bounds_.finalize();
    return grid;
  }

  /// For x_i > x_j: V(i, floor(k x_i)) / V(j, ceil(k x_j)) >= p_i / p_j.
  /// When additionally x_i < 1 and x_j > 0 both marginal rates are equal,
  /// giving V(i, ceil(k x_i)) / V(j, floor(k x_j)) <= p_i / p_j.
  void observe(const Observation& obs) {
    require_same_size(obs.goods(), n_, "DerivativeGrid::observe");
    const auto& x = obs.bundle;
    const auto& p = obs.example.prices;
    const double kd = static_cast<double>(k_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (i == j || !(x[i] > x[j])) continue;
        const double ratio = p[i] / p[j];
        const int i_floor = static_cast<int>(std::floor(kd * x[i]));
        const int j_ceil = static_cast<int>(std::ceil(kd * x[j]));
        bounds_.tighten_lower(node(i, i_floor), node(j, j_ceil), ratio);
        if (x[i] < 1.0 && x[j] > 0.0) {
          const int i_ceil = static_cast<int>(std::ceil(kd * x[i]));
          const int j_floor = static_cast<int>(std::floor(kd * x[j]));
          bounds_.tighten_upper(node(i, i_ceil), node(j, j_floor), ratio);
        }
      }
    }
  }

  /// Whether the bounds imply V(a, la) / p_a >= V(b, lb) / p_b, with la, lb in {-1, ..., k + 1}.
  bool implied_geq(std::size_t a, int la, std::size_t b, int lb, const PriceVector& p) const {
    if (la == -1 || lb == k_ + 1) return true;
    if (la == k_ + 1 || lb == -1) return false;
    return bounds_.implies_geq(node(a, la), node(b, lb), p[a] / p[b]);
  }

  std::size_t node(std::size_t good, int level) const {
    return good * static_cast<std::size_t>(k_ + 1) + static_cast<std::size_t>(level);
  }

  std::size_t goods() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  const RatioBoundMatrix& bounds() const noexcept { return bounds_; }
  void finalize() const { bounds_.finalize(); }

 private:
  std::size_t n_;
  int k_;
  RatioBoundMatrix bounds_;
};

namespace detail {

inline double base_cost(std::span<const int> levels, const PriceVector& p, int k) {
  double c = 0.0;
  for (std::size_t j = 0; j < levels.size(); ++j) c += p[j] * std::max(levels[j], 0) / k;
  return c;
}

inline double cap_cost(std::span<const int> levels, const PriceVector& p, int k) {
  double c = 0.0;
  for (std::size_t j = 0; j < levels.size(); ++j) c += p[j] * std::min(levels[j] + 1, k) / k;
  return c;
}

}  // namespace detail

/// Whether every pair satisfies V(a, l_a)/p_a >= V(b, l_b + 1)/p_b by implication.
inline bool pairwise_property_holds(const DerivativeGrid& grid, const ThresholdAssignment& t,
                                    const PriceVector& p) {
  const std::size_t n = grid.goods();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && !grid.implied_geq(a, t.levels[a], b, t.levels[b] + 1, p)) return false;
    }
  }
  return true;
}

/// Budget sandwich sum p max(l,0)/k <= B <= sum p min(l+1,k)/k. Budget above
/// the price of everything is clamped to that price.
inline bool budget_sandwich_holds(const ThresholdAssignment& t, const PriceVector& p, double budget, int k) {
  const double tol = 1e-12 * std::max(1.0, p.total());
  const double effective = std::min(budget, p.total());
  return detail::base_cost(t.levels, p, k) <= budget + tol &&
         effective <= detail::cap_cost(t.levels, p, k) + tol;
}

/// Searches for thresholds satisfying the pairwise and budget properties.
///
/// Guesses the good i and level l_i whose V(i, l_i + 1)/p_i is largest. For
/// every other good j, t2(j) is the highest level with V(j, t2)/p_j >= that
/// reference implied, and t1(j) the lowest level from which every higher
/// level up to t2 is implied equal to it. Levels start at t1 and are raised
/// one at a time while the base cost fits the budget.
inline std::optional<ThresholdAssignment> find_thresholds(const DerivativeGrid& grid, const PriceVector& p,
                                                          double budget) {
  const std::size_t n = grid.goods();
  const int k = grid.k();
  require_same_size(p.size(), n, "find_thresholds");
  grid.finalize();

  ThresholdAssignment t;
  t.levels.assign(n, -1);
  std::vector<int> top(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (int li = -1; li <= k; ++li) {
      const int ref = li + 1;
      t.levels[i] = li;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        int t2 = -1;
        for (int l = k; l >= -1; --l) {
          if (grid.implied_geq(j, l, i, ref, p)) {
            t2 = l;
            break;
          }
        }
        int t1 = t2;
        for (int l = -1; l < t2; ++l) {
          if (grid.implied_geq(i, ref, j, l + 1, p)) {
            t1 = l;
            break;
          }
        }
        t.levels[j] = t1;
        top[j] = t2;
      }
      double cost = detail::base_cost(t.levels, p, k);
      if (cost > budget + 1e-12 * std::max(1.0, p.total())) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        while (t.levels[j] < top[j]) {
          const double step = t.levels[j] >= 0 ? p[j] / k : 0.0;
          if (cost + step > budget) break;
          cost += step;
          ++t.levels[j];
        }
      }
      if (budget_sandwich_holds(t, p, budget, k) && pairwise_property_holds(grid, t, p)) return t;
    }
  }
  return std::nullopt;
}

/// Bundle for known thresholds: max(l_i, 0)/k of each good, then the leftover
/// budget buys equal quantities of every good with 0 <= l_i < k, capped at 1.
inline Bundle bundle_from_thresholds(const ThresholdAssignment& t, const PriceVector& p, double budget, int k) {
  const std::size_t n = t.levels.size();
  require_same_size(n, p.size(), "bundle_from_thresholds");
  std::vector<double> x(n, 0.0);
  double spent = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(std::max(t.levels[i], 0)) / k;
    spent += p[i] * x[i];
  }
  double residual = budget - spent;
  if (residual < 0.0) {
    // Base levels over budget; scale down to stay feasible.
    const double scale = spent > 0.0 ? budget / spent : 0.0;
    for (auto& q : x) q *= scale;
    return Bundle(std::move(x));
  }
  std::vector<bool> open(n, false);
  for (std::size_t i = 0; i < n; ++i) open[i] = t.levels[i] >= 0 && t.levels[i] < k;
  while (residual > 1e-15 * std::max(1.0, budget)) {
    double price_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (open[i]) price_sum += p[i];
    }
    if (price_sum <= 0.0) break;
    const double q = residual / price_sum;
    bool capped = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!open[i]) continue;
      const double add = std::min(q, 1.0 - x[i]);
      x[i] += add;
      residual -= add * p[i];
      if (x[i] >= 1.0) {
        x[i] = 1.0;
        open[i] = false;
        capped = true;
      }
    }
    if (!capped) break;
  }
  for (auto& q : x) q = std::clamp(q, 0.0, 1.0);
  return Bundle(std::move(x));
}

/// Budget-feasible random bundle, used when no thresholds exist.
inline Bundle random_feasible_bundle(const PriceVector& p, double budget, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(p.size());
  double cost = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = unit(rng);
    cost += p[i] * x[i];
  }
  if (cost > budget) {
    const double scale = cost > 0.0 ? budget / cost : 0.0;
    for (auto& q : x) q *= scale;
  }
  return Bundle(std::move(x));
}

struct SeparablePrediction {
  Bundle bundle;
  std::optional<ThresholdAssignment> thresholds;
  bool found() const noexcept { return thresholds.has_value(); }
};

inline SeparablePrediction predict_detailed(const DerivativeGrid& grid, const PriceVector& p, double budget,
                                            Rng& rng) {
  auto t = find_thresholds(grid, p, budget);
  if (!t) return {random_feasible_bundle(p, budget, rng), std::nullopt};
  Bundle x = bundle_from_thresholds(*t, p, budget, grid.k());
  return {std::move(x), std::move(t)};
}

inline Bundle predict(const DerivativeGrid& grid, const PriceVector& p, double budget, Rng& rng) {
  return predict_detailed(grid, p, budget, rng).bundle;
}

}  // namespace revpref
